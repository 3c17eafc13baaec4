#include "doctest.h"
#include "scenarios.hpp"

#include <string>

TEST_CASE("stale helpers leave shared state untouched") {
  const auto s = wdtest::run_stale_helper_scenarios(2000, 11);
  INFO((s.messages.empty() ? std::string() : s.messages.front()));
  CHECK(s.violations == 0);
  MESSAGE("runs " << s.runs << ", interesting " << s.interesting << ", ops " << s.operations);
  CHECK(s.interesting > 100);
}

TEST_CASE("k-CAS histories under random schedules are linearizable") {
  const auto s = wdtest::run_kcas_linearizability(500, 21);
  INFO((s.messages.empty() ? std::string() : s.messages.front()));
  CHECK(s.violations == 0);
  MESSAGE("runs " << s.runs << ", interesting " << s.interesting << ", ops " << s.operations);
  CHECK(s.interesting > 100);
}

TEST_CASE("descriptor ADT histories are linearizable under bounded preemption") {
  const auto s = wdtest::run_adt_linearizability(10, 2, 31);
  INFO((s.messages.empty() ? std::string() : s.messages.front()));
  MESSAGE("schedules explored: " << s.runs);
  CHECK(s.violations == 0);
  CHECK(s.runs > 100);
}
