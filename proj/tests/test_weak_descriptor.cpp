#include <array>
#include <atomic>
#include <random>
#include <vector>

#include "coop_scheduler.hpp"
#include "doctest.h"
#include "weakdesc/dcss.hpp"
#include "weakdesc/errors.hpp"
#include "weakdesc/kcas.hpp"
#include "weakdesc/weak_descriptor.hpp"

using namespace weakdesc;

namespace {

DescriptorSchema five_and_state() {
  return DescriptorSchema("T", {{"f1"}, {"f2"}, {"f3"}, {"f4"}, {"f5"}, {"state", true, 2}});
}

constexpr Word kUndecided = 0, kSucceeded = 1, kFailed = 2;

struct Fixture {
  explicit Fixture(unsigned seq_bits = 48)
      : table(five_and_state(), registry, &ledger, TableOptions{seq_bits}),
        p(registry.register_process()),
        f1(table.field("f1")),
        state(table.field("state")) {}

  DescriptorHandle make(Word base, Word st = kUndecided) {
    const std::array<Word, 5> imm{base, base + 1, base + 2, base + 3, base + 4};
    const std::array<Word, 1> mut{st};
    return table.create_new(p, imm, mut);
  }

  ProcessRegistry registry{4};
  FootprintLedger ledger{4};
  DescriptorTable table;
  ProcessId p;
  FieldRef f1, state;
};

}  // namespace

TEST_CASE("read_field on a fresh handle") {
  Fixture fx;
  const std::array<Word, 5> imm{9, 0, 0, 0, 0};
  const std::array<Word, 1> mut{kUndecided};
  const auto h = fx.table.create_new(fx.p, imm, mut);
  CHECK(fx.table.read_field(h, fx.f1, 0) == 9);
  CHECK(fx.table.read_field(h, fx.f1) == std::optional<Word>(9));
  CHECK(fx.table.read_field(h, fx.state, 3) == kUndecided);
}

TEST_CASE("read_field after the owner's next create_new returns the default") {
  Fixture fx;
  const auto h = fx.make(9);
  fx.make(100);
  CHECK(fx.table.read_field(h, fx.f1, 77) == 77);
  CHECK(fx.table.read_field(h, fx.state, 3) == 3);
  CHECK_FALSE(fx.table.read_field(h, fx.f1).has_value());
}

TEST_CASE("cas_field then read_field on a valid handle") {
  Fixture fx;
  const auto h = fx.make(1);
  CHECK(fx.table.cas_field(h, fx.state, kUndecided, kFailed) == std::optional<Word>(kFailed));
  CHECK(fx.table.read_field(h, fx.state, 3) == kFailed);
}

TEST_CASE("read_immutables") {
  Fixture fx;
  const auto h = fx.make(1);
  const auto all = fx.table.read_immutables(h);
  REQUIRE(all.has_value());
  CHECK(*all == std::vector<Word>{1, 2, 3, 4, 5});

  std::array<Word, 2> prefix{};
  CHECK(fx.table.read_immutables(h, prefix));
  CHECK(prefix == std::array<Word, 2>{1, 2});
  std::array<Word, 6> too_many{};
  CHECK_THROWS_AS(fx.table.read_immutables(h, too_many), SchemaError);

  fx.make(10);
  CHECK_FALSE(fx.table.read_immutables(h).has_value());
}

TEST_CASE("write_field") {
  Fixture fx;
  const auto h = fx.make(1);
  fx.table.write_field(h, fx.state, kFailed);
  CHECK(fx.table.read_field(h, fx.state, 3) == kFailed);

  const auto h2 = fx.make(2, kSucceeded);
  const Word before = *fx.table.slot_mutables(fx.p);
  fx.table.write_field(h, fx.state, kFailed);
  CHECK(*fx.table.slot_mutables(fx.p) == before);
  CHECK(fx.table.read_field(h2, fx.state, 3) == kSucceeded);

  CHECK_THROWS_AS(fx.table.write_field(h2, fx.state, 4), SchemaError);
  CHECK_THROWS_AS(fx.table.write_field(h2, fx.f1, 0), SchemaError);
}

TEST_CASE("cas_field") {
  Fixture fx;
  const auto h = fx.make(1);
  CHECK(fx.table.cas_field(h, fx.state, kUndecided, kSucceeded) == std::optional<Word>(kSucceeded));
  CHECK(fx.table.read_field(h, fx.state, 3) == kSucceeded);
  // Only the first decision sticks.
  CHECK(fx.table.cas_field(h, fx.state, kUndecided, kFailed) == std::optional<Word>(kSucceeded));
  CHECK(fx.table.read_field(h, fx.state, 3) == kSucceeded);
  fx.make(2);
  CHECK_FALSE(fx.table.cas_field(h, fx.state, kUndecided, kFailed).has_value());
}

TEST_CASE("invalidity is permanent") {
  Fixture fx;
  const auto h = fx.make(1);
  fx.make(2);
  for (int i = 0; i < 100; ++i) {
    const auto cur = fx.make(10 + i, i % 3);
    CHECK(fx.table.read_field(h, fx.f1, 77) == 77);
    CHECK_FALSE(fx.table.read_immutables(h).has_value());
    CHECK_FALSE(fx.table.cas_field(h, fx.state, i % 3, 0).has_value());
    fx.table.write_field(h, fx.state, 0);
    CHECK(fx.table.read_field(cur, fx.state, 3) == Word(i % 3));
  }
}

TEST_CASE("sequence numbers: even, step 2, owner-only") {
  Fixture fx;
  DescriptorHandle prev = fx.make(0);
  CHECK(prev.seq() == 2);
  CHECK(prev.owner() == fx.p);
  for (int i = 0; i < 1000; ++i) {
    const auto h = fx.make(i);
    CHECK(h.seq() % 2 == 0);
    CHECK(h.seq() == prev.seq() + 2);
    CHECK(*fx.table.slot_seq(fx.p) == h.seq());
    fx.table.write_field(h, fx.state, 2);
    fx.table.cas_field(h, fx.state, 2, 1);
    CHECK(*fx.table.slot_seq(fx.p) == h.seq());
    prev = h;
  }
}

TEST_CASE("sequence numbers wrap silently at small widths") {
  Fixture fx(2);
  CHECK(fx.table.seq_bits() == 2);
  const auto a = fx.make(1);
  const auto b = fx.make(2);
  const auto c = fx.make(3);
  CHECK(a.seq() == 2);
  CHECK(b.seq() == 0);
  CHECK(c.seq() == 2);
  // The stale handle a is indistinguishable from c: the hazard that a
  // wide sequence number avoids.
  CHECK(a == c);
  CHECK(fx.table.read_field(a, fx.f1, 0) == 3);
}

TEST_CASE("sequence width is validated") {
  ProcessRegistry r(1);
  CHECK_THROWS_AS(DescriptorTable(five_and_state(), r, nullptr, TableOptions{1}), ContractError);
  CHECK_THROWS_AS(DescriptorTable(five_and_state(), r, nullptr, TableOptions{49}), ContractError);
  CHECK_NOTHROW(DescriptorTable(five_and_state(), r, nullptr, TableOptions{2}));
  CHECK_NOTHROW(DescriptorTable(five_and_state(), r, nullptr, TableOptions{48}));
}

TEST_CASE("create_new checks the caller and the field lists") {
  Fixture fx;
  ProcessId other = 0;
  std::thread t([&] { other = fx.registry.register_process(); });
  t.join();
  const std::array<Word, 5> imm{};
  const std::array<Word, 1> mut{0};
  CHECK_THROWS_AS(fx.table.create_new(other, imm, mut), ContractError);
  const std::array<Word, 4> short_imm{};
  CHECK_THROWS_AS(fx.table.create_new(fx.p, short_imm, mut), SchemaError);
  const std::array<Word, 1> big{7};
  CHECK_THROWS_AS(fx.table.create_new(fx.p, imm, big), SchemaError);
  CHECK_THROWS_AS(fx.table.field("missing"), SchemaError);
  CHECK(fx.table.materialized_slots() == 0);
}

TEST_CASE("slots are materialized lazily and padded to 128 bytes") {
  Fixture fx;
  CHECK(fx.table.slot_bytes() == 128);
  CHECK(fx.table.materialized_slots() == 0);
  CHECK(fx.ledger.aggregate_max_footprint() == 0);
  const auto h = fx.make(1);
  CHECK(fx.table.materialized_slots() == 1);
  for (int i = 0; i < 100; ++i) fx.make(i);
  CHECK(fx.table.materialized_slots() == 1);
  CHECK(fx.ledger.counters(fx.p).total_malloc == 128);
  CHECK(fx.ledger.aggregate_max_footprint() == 128);
  CHECK(reinterpret_cast<std::uintptr_t>(fx.table.slot_snapshot(fx.p).data()) != 0);
  (void)h;
}

TEST_CASE("slot sizes of the DCSS and k-CAS descriptor types") {
  ProcessRegistry r(1);
  CHECK(DescriptorTable(dcss_schema(), r).slot_bytes() == 128);
  // count + 3 words per entry + the mutables word.
  CHECK(DescriptorTable(kcas_schema(4), r).slot_bytes() == 128);
  CHECK(DescriptorTable(kcas_schema(5), r).slot_bytes() == 256);
  CHECK(DescriptorTable(kcas_schema(16), r).slot_bytes() == 512);
}

TEST_CASE("reads racing a reinitialization never mix generations") {
  std::mt19937_64 rng(5);
  std::uint64_t valid_reads = 0, invalid_reads = 0, bad = 0;
  for (int run = 0; run < 300; ++run) {
    ProcessRegistry registry(2);
    DescriptorTable table(five_and_state(), registry);
    std::atomic<Word> mailbox{DescriptorHandle::make(0, 1000).bits()};
    wdtest::CoopScheduler sched;
    sched.run(
        {[&] {
           const ProcessId p = registry.register_process();
           for (Word g = 1; g <= 4; ++g) {
             const std::array<Word, 5> imm{g, g, g, g, g};
             const std::array<Word, 1> mut{0};
             mailbox.store(table.create_new(p, imm, mut).bits());
           }
         },
         [&] {
           registry.register_process();
           for (int i = 0; i < 4; ++i) {
             const auto v = table.read_immutables(DescriptorHandle(mailbox.load()));
             if (!v) {
               ++invalid_reads;
               continue;
             }
             ++valid_reads;
             for (Word w : *v) bad += w != (*v)[0];
           }
         }},
        wdtest::random_policy(rng, 0.4));
  }
  CHECK(bad == 0);
  CHECK(valid_reads > 0);
  CHECK(invalid_reads > 0);
}

TEST_CASE("a paused create_new hides both the old and the new incarnation") {
  ProcessRegistry registry(2);
  DescriptorTable table(five_and_state(), registry);
  const FieldRef f1 = table.field("f1");
  DescriptorHandle first;
  std::optional<Word> old_read, new_read;
  bool probed = false;
  int field_writes = 0;
  wdtest::CoopScheduler sched;
  // Owner runs until the third field store of its second create_new, then
  // the observer probes both handles.
  sched.run(
      {[&] {
         const ProcessId p = registry.register_process();
         const std::array<Word, 5> a{1, 1, 1, 1, 1}, b{2, 2, 2, 2, 2};
         const std::array<Word, 1> mut{0};
         first = table.create_new(p, a, mut);
         table.create_new(p, b, mut);
       },
       [&] {
         registry.register_process();
         old_read = table.read_field(first, f1);
         new_read = table.read_field(DescriptorHandle::make(first.owner(), first.seq() + 2), f1);
         probed = true;
       }},
      [&](const wdtest::CoopScheduler::Point& pt) -> std::size_t {
        if (pt.current == wdtest::CoopScheduler::kNone) return 0;  // owner first
        if (pt.current == 0 && pt.hook == HookPoint::slot_field_write && ++field_writes == 8) {
          return 1;
        }
        return 0;
      });
  CHECK(probed);
  CHECK_FALSE(old_read.has_value());
  CHECK_FALSE(new_read.has_value());
}

TEST_CASE("concurrent writes to one field leave one of the written values") {
  std::mt19937_64 rng(9);
  ProcessRegistry registry(3);
  DescriptorTable table(five_and_state(), registry);
  const FieldRef state = table.field("state");
  const ProcessId owner = registry.register_process();
  const std::array<Word, 5> imm{};
  const std::array<Word, 1> mut{0};
  std::uint64_t bad = 0;
  for (int round = 0; round < 10000; ++round) {
    const auto h = table.create_new(owner, imm, mut);
    wdtest::CoopScheduler sched;
    sched.run({[&] { table.write_field(h, state, 1); }, [&] { table.write_field(h, state, 2); }},
              wdtest::random_policy(rng, 0.5));
    const Word v = table.read_field(h, state, 3);
    bad += v != 1 && v != 2;
  }
  CHECK(bad == 0);
}
