#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "weakdesc/harness.hpp"

namespace weakdesc::selftest {

struct SuiteResult {
  std::string name;
  std::uint64_t checks = 0;
  std::uint64_t violations = 0;
  std::vector<std::string> messages;  // first few violations

  bool ok() const { return violations == 0 && checks > 0; }
  void fail(std::string msg);
};

// Random single-threaded DCSS, k-CAS and read operations over a 16-cell
// array, each compared with the brute-force sequential model: every return
// value and the final array.
SuiteResult run_oracle_suite(harness::ProviderKind provider, std::uint64_t ops,
                             std::uint64_t seed);

// Sequence-number properties of the reusable table: handles carry even
// numbers, consecutive ones step by 2 (mod 2^B), the slot number is odd
// and old/new handles are rejected while create_new rewrites fields, and
// operations by other processes never move it.
SuiteResult run_observation_suite(std::uint64_t iterations, unsigned seq_bits,
                                  std::uint64_t seed);

}  // namespace weakdesc::selftest
