#include "weakdesc/selftest.hpp"

#include <array>
#include <random>

#include "weakdesc/providers.hpp"
#include "weakdesc/reference_model.hpp"

namespace weakdesc::selftest {

void SuiteResult::fail(std::string msg) {
  ++violations;
  if (messages.size() < 8) messages.push_back(std::move(msg));
}

namespace {

constexpr std::size_t kOracleCells = 16;
constexpr Word kValueRange = 8;

template <class System>
void oracle_run(SuiteResult& out, std::uint64_t ops, std::uint64_t seed) {
  SystemOptions opts;
  opts.max_processes = 1;
  System sys(opts);
  const ProcessId p = sys.registry.register_process();
  CellArray array(kOracleCells, 0);
  reference::SequentialMemory model(kOracleCells, 0);

  std::mt19937_64 rng(seed);
  auto below = [&](std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng);
  };
  auto random_value = [&] { return below(kValueRange) << harness::kValueShift; };
  // Mostly the current value, so that a good share of operations succeed.
  auto guess = [&](std::size_t i) { return below(4) != 0 ? model.read(i) : random_value(); };

  std::array<std::size_t, kOracleCells> perm;
  for (std::size_t i = 0; i < kOracleCells; ++i) perm[i] = i;

  for (std::uint64_t n = 0; n < ops; ++n) {
    const auto kind = below(10);
    if (kind < 4) {
      const std::size_t i1 = below(kOracleCells);
      std::size_t i2 = below(kOracleCells - 1);
      if (i2 >= i1) ++i2;
      const Word e1 = guess(i1), e2 = guess(i2), n2 = random_value();
      const Word want = model.dcss(i1, e1, i2, e2, n2);
      const Word got = sys.kcas.dcss().dcss(
          p, DcssOperands{Operand1::cell(array.ref(i1)), e1, array.ref(i2), e2, n2});
      ++out.checks;
      if (got != want) {
        out.fail("dcss #" + std::to_string(n) + " returned " + std::to_string(got) +
                 ", model " + std::to_string(want));
      }
    } else if (kind < 8) {
      const std::size_t k = 1 + below(below(4) == 0 ? kOracleCells : 4);
      std::shuffle(perm.begin(), perm.end(), rng);
      std::array<KcasEntry, kOracleCells> entries;
      std::array<reference::SequentialMemory::Entry, kOracleCells> ref;
      for (std::size_t j = 0; j < k; ++j) {
        const std::size_t i = perm[j];
        const Word e = guess(i), d = random_value();
        entries[j] = KcasEntry{array.ref(i), e, d};
        ref[j] = {i, e, d};
      }
      const bool want = model.kcas(std::span(ref.data(), k));
      const bool got = sys.kcas.kcas(p, std::span<const KcasEntry>(entries.data(), k));
      ++out.checks;
      if (got != want) {
        out.fail("kcas #" + std::to_string(n) + " returned " + std::to_string(got) +
                 ", model " + std::to_string(want));
      }
    } else {
      const std::size_t i = below(kOracleCells);
      const Word got = kind == 8 ? sys.kcas.read(p, array, i) : sys.kcas.dcss().read(p, array, i);
      ++out.checks;
      if (got != model.read(i)) {
        out.fail("read #" + std::to_string(n) + " of cell " + std::to_string(i) + " returned " +
                 std::to_string(got) + ", model " + std::to_string(model.read(i)));
      }
    }
  }
  for (std::size_t i = 0; i < kOracleCells; ++i) {
    ++out.checks;
    if (array.read(i) != model.read(i)) {
      out.fail("final cell " + std::to_string(i) + " is " + std::to_string(array.read(i)) +
               ", model " + std::to_string(model.read(i)));
    }
  }
}

DescriptorSchema observation_schema() {
  return DescriptorSchema("probe", {{"a"}, {"b"}, {"c"}, {"d"}, {"e"}, {"state", true, 2}});
}

// Checks the slot from inside create_new, between the two seq stores.
class WindowProbe : public HookSink {
 public:
  WindowProbe(DescriptorTable& table, ProcessId p, SuiteResult& out)
      : table_(table), p_(p), out_(out), a_(table.field("a")), state_(table.field("state")) {}

  void arm(DescriptorHandle prev) {
    prev_ = prev;
    next_ = DescriptorHandle::make(p_, (prev.seq() + 2) & ((Word{1} << table_.seq_bits()) - 1));
    writes_seen_ = 0;
  }

  void on_point(HookPoint point) override {
    if (busy_) return;
    if (point != HookPoint::slot_field_write && point != HookPoint::slot_seq_even) return;
    busy_ = true;
    if (point == HookPoint::slot_field_write) ++writes_seen_;
    const auto seq = table_.slot_seq(p_);
    ++out_.checks;
    if (!seq || (*seq & 1) == 0) out_.fail("slot seq not odd inside create_new");
    constexpr Word dv = 0xABCD0;
    ++out_.checks;
    if (table_.read_field(prev_, a_, dv) != dv) out_.fail("old handle readable in odd window");
    ++out_.checks;
    if (table_.read_field(next_, a_, dv) != dv) out_.fail("next handle readable in odd window");
    std::array<Word, 5> buf;
    ++out_.checks;
    if (table_.read_immutables(prev_, buf) || table_.read_immutables(next_, buf)) {
      out_.fail("read_immutables succeeded in odd window");
    }
    ++out_.checks;
    if (table_.cas_field(next_, state_, 0, 1).has_value()) {
      out_.fail("cas_field succeeded in odd window");
    }
    busy_ = false;
  }

  std::size_t writes_seen() const { return writes_seen_; }

 private:
  DescriptorTable& table_;
  ProcessId p_;
  SuiteResult& out_;
  FieldRef a_, state_;
  DescriptorHandle prev_, next_;
  std::size_t writes_seen_ = 0;
  bool busy_ = false;
};

}  // namespace

SuiteResult run_oracle_suite(harness::ProviderKind provider, std::uint64_t ops,
                             std::uint64_t seed) {
  SuiteResult out;
  out.name = std::string("oracle/") + std::string(harness::to_string(provider));
  if (provider == harness::ProviderKind::reuse) {
    oracle_run<ReuseSystem>(out, ops, seed);
  } else {
    oracle_run<WastefulSystem>(out, ops, seed);
  }
  return out;
}

SuiteResult run_observation_suite(std::uint64_t iterations, unsigned seq_bits,
                                  std::uint64_t seed) {
  SuiteResult out;
  out.name = "observations/B=" + std::to_string(seq_bits);
  ProcessRegistry registry(2);
  DescriptorTable table(observation_schema(), registry, nullptr, TableOptions{seq_bits});
  const ProcessId p = registry.register_process();
  const ProcessId q = registry.register_process();
  const FieldRef state = table.field("state");
  const Word seq_mask = (Word{1} << seq_bits) - 1;
  std::mt19937_64 rng(seed);

  WindowProbe probe(table, p, out);
  std::array<Word, 5> fields{};
  const std::array<Word, 1> mut{0};

  DescriptorHandle prev = table.create_new(p, fields, mut);
  DescriptorHandle other = table.create_new(q, fields, mut);
  ++out.checks;
  if (prev.seq() % 2 != 0) out.fail("first handle has odd seq");

  for (std::uint64_t it = 1; it <= iterations; ++it) {
    for (std::size_t i = 0; i < fields.size(); ++i) fields[i] = (it << 8 | i) << 2;

    probe.arm(prev);
    t_hook_sink = &probe;
    const DescriptorHandle h = table.create_new(p, fields, mut);
    t_hook_sink = nullptr;

    ++out.checks;
    if (probe.writes_seen() != fields.size()) out.fail("field writes not observed");
    ++out.checks;
    if (h.seq() % 2 != 0) out.fail("handle with odd seq " + std::to_string(h.seq()));
    ++out.checks;
    if (h.seq() != ((prev.seq() + 2) & seq_mask)) {
      out.fail("seq stepped from " + std::to_string(prev.seq()) + " to " + std::to_string(h.seq()));
    }
    ++out.checks;
    if (h.owner() != p) out.fail("handle names the wrong owner");

    // The new incarnation reads back whole; the old one is gone for good.
    std::array<Word, 5> back{};
    ++out.checks;
    if (!table.read_immutables(h, back) || back != fields) out.fail("torn or invalid read");
    const Word before = *table.slot_mutables(p);
    table.write_field(prev, state, 2);
    ++out.checks;
    if (table.cas_field(prev, state, 0, 1).has_value() || *table.slot_mutables(p) != before) {
      out.fail("operation on an old handle had an effect");
    }

    // Mutable-field traffic from another process never moves p's seq.
    const Word seq_before = *table.slot_seq(p);
    const Word s = std::uniform_int_distribution<Word>(0, 2)(rng);
    table.write_field(h, state, s);
    table.cas_field(h, state, s, (s + 1) % 3);
    table.read_field(other, state);
    ++out.checks;
    if (*table.slot_seq(p) != seq_before) out.fail("seq moved outside create_new");
    ++out.checks;
    if (table.read_field(h, state, 3) != (s + 1) % 3) out.fail("mutable field lost an update");

    prev = h;
  }
  return out;
}

}  // namespace weakdesc::selftest
