// One PASS/FAIL line per acceptance criterion. Thresholds are fixed here;
// nothing is tuned from the results.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "scenarios.hpp"
#include "weakdesc/harness.hpp"
#include "weakdesc/selftest.hpp"

using namespace weakdesc;
using namespace weakdesc::harness;

namespace {

// Pinned parameters.
constexpr std::size_t kChecksumTrials = 10;
constexpr std::uint64_t kTrialMs = 1000;
constexpr std::uint64_t kOracleOps = 100000;
constexpr std::uint64_t kObservationIterations = 10000;
constexpr std::uint64_t kFootprintRatio = 100;
constexpr std::size_t kThroughputTrials = 5;
constexpr double kThroughputRatio = 1.0;
constexpr std::size_t kWrapTrials = 50;
constexpr double kWrapSmallBFraction = 0.5;
constexpr std::uint64_t kStaleHelperRuns = 10000;
constexpr std::uint64_t kLinearizabilitySchedules = 1000;
constexpr std::uint64_t kAdtPrograms = 20;
constexpr unsigned kAdtPreemptions = 2;

std::size_t max_threads() {
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Criterion-1 results feed criterion 8.
std::vector<TrialResult> g_checksum_runs;

Outcome checksum_invariant(std::uint64_t seed) {
  std::set<std::size_t> thread_counts{1, 2, 4, max_threads()};
  std::size_t configs = 0, trials = 0, bad = 0;
  std::string first_bad;
  for (auto provider : {ProviderKind::reuse, ProviderKind::wasteful}) {
    for (std::size_t n : thread_counts) {
      for (std::size_t size : {std::size_t{1} << 10, std::size_t{1} << 14}) {
        for (std::size_t k : {2u, 16u}) {
          ++configs;
          for (std::size_t t = 0; t < kChecksumTrials; ++t) {
            BenchConfig c;
            c.provider = provider;
            c.threads = n;
            c.size = size;
            c.k = k;
            c.duration_ms = kTrialMs;
            c.seed = seed + trials;
            TrialResult r = run_isolated_trial(c);
            ++trials;
            if (!r.checksum_ok || r.error_kind != ErrorKind::none) {
              ++bad;
              if (first_bad.empty()) {
                first_bad = std::string(to_string(provider)) + " n=" + std::to_string(n) +
                            " S=" + std::to_string(size) + " k=" + std::to_string(k) + " " +
                            std::string(to_string(r.error_kind));
              }
            }
            g_checksum_runs.push_back(std::move(r));
          }
        }
      }
    }
  }
  std::ostringstream d;
  d << configs << " configs, " << trials << " trials, " << bad << " failed";
  if (!first_bad.empty()) d << " (first: " << first_bad << ")";
  return {bad == 0, d.str()};
}

Outcome oracle_equivalence(std::uint64_t seed) {
  std::ostringstream d;
  bool pass = true;
  for (auto provider : {ProviderKind::reuse, ProviderKind::wasteful}) {
    const auto r = selftest::run_oracle_suite(provider, kOracleOps, seed);
    pass = pass && r.ok();
    d << to_string(provider) << ": " << r.checks << " checks, " << r.violations
      << " mismatches; ";
    if (!r.messages.empty()) d << r.messages.front() << "; ";
  }
  return {pass, d.str()};
}

Outcome observations(std::uint64_t seed) {
  std::ostringstream d;
  bool pass = true;
  for (unsigned bits : {48u, 4u}) {
    const auto r = selftest::run_observation_suite(kObservationIterations, bits, seed);
    pass = pass && r.ok();
    d << "B=" << bits << ": " << r.checks << " checks, " << r.violations << " violations; ";
    if (!r.messages.empty()) d << r.messages.front() << "; ";
  }
  return {pass, d.str()};
}

BenchConfig max_threads_config(ProviderKind provider, std::uint64_t seed) {
  BenchConfig c;
  c.provider = provider;
  c.threads = max_threads();
  c.size = std::size_t{1} << 14;
  c.k = 16;
  c.duration_ms = kTrialMs;
  c.seed = seed;
  return c;
}

Outcome footprint_gap(std::uint64_t seed) {
  const TrialResult reuse = run_isolated_trial(max_threads_config(ProviderKind::reuse, seed));
  const TrialResult waste = run_isolated_trial(max_threads_config(ProviderKind::wasteful, seed));
  const std::uint64_t expected = reuse.config.threads * 2 * 128;
  const bool exact = reuse.footprint_bytes == expected;
  const bool ratio = reuse.footprint_bytes > 0 && reuse.passed() && waste.passed() &&
                     waste.footprint_bytes >= kFootprintRatio * reuse.footprint_bytes;
  std::ostringstream d;
  d << "threads=" << reuse.config.threads << " reuse=" << reuse.footprint_bytes
    << " B (expected " << expected << (exact ? ", exact" : ", MISMATCH") << "), wasteful="
    << waste.footprint_bytes << " B, ratio="
    << (reuse.footprint_bytes ? static_cast<double>(waste.footprint_bytes) /
                                    static_cast<double>(reuse.footprint_bytes)
                              : 0.0)
    << (ratio ? " (>= " : " (< ") << kFootprintRatio << "x)";
  return {exact && ratio, d.str()};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

Outcome throughput_order(std::uint64_t seed) {
  std::vector<double> reuse, waste;
  bool clean = true;
  // Interleave providers so drift in machine load hits both alike.
  for (std::size_t t = 0; t < kThroughputTrials; ++t) {
    const TrialResult a = run_isolated_trial(max_threads_config(ProviderKind::reuse, seed + t));
    const TrialResult b =
        run_isolated_trial(max_threads_config(ProviderKind::wasteful, seed + t));
    clean = clean && a.passed() && b.passed();
    reuse.push_back(a.throughput_ops_per_us);
    waste.push_back(b.throughput_ops_per_us);
  }
  const double mr = median(reuse), mw = median(waste);
  std::ostringstream d;
  d.precision(4);
  d << "median ops/us reuse=" << mr << " wasteful=" << mw << " ratio=" << (mw > 0 ? mr / mw : 0);
  return {clean && mw > 0 && mr >= kThroughputRatio * mw, d.str()};
}

Outcome wraparound(std::uint64_t seed) {
  BenchConfig c;
  c.provider = ProviderKind::reuse;
  c.threads = std::max<std::size_t>(8, max_threads());
  c.size = 8;
  c.k = 4;
  c.duration_ms = 500;
  c.trials = kWrapTrials;
  c.seed = seed;
  c.seq_bits = 4;
  const WraparoundSummary small = run_wraparound(c);
  c.seq_bits = 48;
  const WraparoundSummary wide = run_wraparound(c);
  std::ostringstream d;
  d << "n=" << c.threads << " S=" << c.size << " k=" << c.k << ": B=4 failures "
    << small.failures() << "/" << small.trials << " (checksum " << small.checksum_errors
    << ", livelock " << small.livelocks << ", fault " << small.faults << "), B=48 failures "
    << wide.failures() << "/" << wide.trials;
  return {small.failure_fraction() > kWrapSmallBFraction && wide.failures() == 0, d.str()};
}

Outcome invalid_operations(std::uint64_t seed) {
  const auto s = wdtest::run_stale_helper_scenarios(kStaleHelperRuns, seed);
  std::ostringstream d;
  d << s.runs << " interleavings, " << s.interesting << " with an invalid descriptor seen, "
    << s.violations << " violations";
  if (!s.messages.empty()) d << "; " << s.messages.front();
  return {s.violations == 0 && s.runs >= kStaleHelperRuns && s.interesting > 0, d.str()};
}

Outcome cleanliness() {
  std::uint64_t flagged = 0, dirty = 0;
  for (const auto& r : g_checksum_runs) {
    flagged += r.flagged_cells;
    dirty += r.flagged_cells != 0;
  }
  std::ostringstream d;
  d << g_checksum_runs.size() << " trials scanned, " << dirty << " with flagged cells ("
    << flagged << " cells)";
  return {!g_checksum_runs.empty() && dirty == 0, d.str()};
}

Outcome linearizability(std::uint64_t seed) {
  const auto k = wdtest::run_kcas_linearizability(kLinearizabilitySchedules, seed);
  const auto a = wdtest::run_adt_linearizability(kAdtPrograms, kAdtPreemptions, seed);
  std::ostringstream d;
  d << "kcas/dcss: " << k.runs << " schedules, " << k.violations << " non-linearizable; "
    << "descriptor ADT: " << a.runs << " schedules, " << a.violations << " non-linearizable";
  for (const auto* s : {&k, &a}) {
    if (!s->messages.empty()) d << "; " << s->messages.front();
  }
  return {k.violations == 0 && a.violations == 0 && k.runs >= kLinearizabilitySchedules, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::vector<int> only;
  std::uint64_t seed = 20240601;
  app.add_option("--only", only, "criteria to run (default all)")->check(CLI::Range(1, 9));
  app.add_option("--seed", seed);
  CLI11_PARSE(app, argc, argv);

  auto wanted = [&](int n) { return only.empty() || std::count(only.begin(), only.end(), n); };
  // Criterion 8 reads criterion 1's trials.
  if (wanted(8) && !wanted(1)) only.push_back(1);

  struct Entry {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Entry> entries{
      {1, "checksum invariant", [&] { return checksum_invariant(seed); }},
      {2, "sequential oracle", [&] { return oracle_equivalence(seed); }},
      {3, "sequence observations", [&] { return observations(seed); }},
      {4, "footprint", [&] { return footprint_gap(seed); }},
      {5, "throughput order", [&] { return throughput_order(seed); }},
      {6, "wraparound", [&] { return wraparound(seed); }},
      {7, "invalid operations", [&] { return invalid_operations(seed); }},
      {8, "quiescent cleanliness", [] { return cleanliness(); }},
      {9, "linearizability", [&] { return linearizability(seed); }},
  };

  int failed = 0;
  for (const auto& e : entries) {
    if (!wanted(e.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = e.run();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    while (o.detail.size() >= 2 && o.detail.ends_with("; ")) o.detail.resize(o.detail.size() - 2);
    failed += !o.pass;
    std::printf("criterion %d %-22s %s  %s [%.1fs]\n", e.id, e.name, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
