// k-CAS microbenchmark, stress runner, wraparound study and self-test.
#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "weakdesc/errors.hpp"
#include "weakdesc/harness.hpp"
#include "weakdesc/kcas.hpp"
#include "weakdesc/process.hpp"
#include "weakdesc/report.hpp"
#include "weakdesc/selftest.hpp"

namespace {

using namespace weakdesc;
using namespace weakdesc::harness;

struct Flags {
  std::string provider = "reuse";
  std::size_t threads = 1;
  std::size_t size = std::size_t{1} << 14;
  std::size_t k = 16;
  std::uint64_t ms = 1000;
  std::uint64_t ops = 0;
  std::size_t trials = 1;
  unsigned seq_bits = 48;
  std::uint64_t seed = 1;
  std::string format = "json";
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--provider", f.provider, "Descriptor provider")
      ->check(CLI::IsMember({"reuse", "wasteful"}))
      ->capture_default_str();
  cmd->add_option("--threads", f.threads, "Worker threads")
      ->check(CLI::Range(std::size_t{1}, kMaxProcesses))
      ->capture_default_str();
  cmd->add_option("--size", f.size, "Array size (power of two)")
      ->check(CLI::Validator(
          [](std::string& s) -> std::string {
            const auto v = std::stoull(s);
            return v != 0 && (v & (v - 1)) == 0 ? "" : "size must be a power of two";
          },
          "POW2"))
      ->capture_default_str();
  cmd->add_option("--k", f.k, "Words per k-CAS")
      ->check(CLI::Range(std::size_t{1}, kKmaxLimit))
      ->capture_default_str();
  cmd->add_option("--ms", f.ms, "Trial duration in milliseconds")->capture_default_str();
  cmd->add_option("--ops", f.ops, "Fixed k-CAS attempts per thread (overrides --ms)");
  cmd->add_option("--trials", f.trials, "Number of trials")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--seq-bits", f.seq_bits, "Sequence number width")
      ->check(CLI::Range(2u, 48u))
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "RNG seed; trial t uses seed + t")->capture_default_str();
  cmd->add_option("--format", f.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
}

BenchConfig to_config(const Flags& f) {
  BenchConfig c;
  c.provider = *parse_provider(f.provider);
  c.threads = f.threads;
  c.size = f.size;
  c.k = f.k;
  c.duration_ms = f.ms;
  c.ops_per_thread = f.ops;
  c.seq_bits = f.seq_bits;
  c.seed = f.seed;
  c.trials = f.trials;
  return c;
}

void emit(const Flags& f, const TrialResult& r, bool& header_done) {
  if (f.format == "csv") {
    if (!header_done) std::cout << csv_header() << '\n';
    header_done = true;
    std::cout << csv_row(r) << '\n';
  } else {
    std::cout << to_json(r).dump() << '\n';
  }
  std::cout.flush();
}

int run_trials(const Flags& f, bool isolated, bool quarantine) {
  BenchConfig base = to_config(f);
  base.quarantine = quarantine;
  base.validate();
  bool ok = true;
  bool header_done = false;
  for (std::size_t t = 0; t < base.trials; ++t) {
    BenchConfig c = base;
    c.seed = base.seed + t;
    const TrialResult r = isolated ? run_isolated_trial(c) : run_kcas_trial(c);
    emit(f, r, header_done);
    ok = ok && r.passed();
  }
  return ok ? 0 : 1;
}

int run_wraparound_cmd(const Flags& f) {
  BenchConfig c = to_config(f);
  if (c.provider != ProviderKind::reuse) {
    std::cerr << "wraparound: only the reuse provider has sequence numbers\n";
    return 2;
  }
  c.validate();
  bool header_done = false;
  const WraparoundSummary s = run_wraparound(c, [&](const TrialResult& r) {
    emit(f, r, header_done);
  });
  if (f.format == "csv") {
    std::cout << wraparound_csv_header() << '\n' << wraparound_csv_row(s) << '\n';
  } else {
    std::cout << to_json(s).dump() << '\n';
  }
  return 0;
}

int run_selftest(const Flags& f) {
  std::vector<selftest::SuiteResult> suites;
  suites.push_back(selftest::run_oracle_suite(ProviderKind::reuse, 100000, f.seed));
  suites.push_back(selftest::run_oracle_suite(ProviderKind::wasteful, 100000, f.seed));
  suites.push_back(selftest::run_observation_suite(10000, 48, f.seed));
  suites.push_back(selftest::run_observation_suite(10000, 4, f.seed));
  bool ok = true;
  for (const auto& s : suites) {
    nlohmann::ordered_json j;
    j["suite"] = s.name;
    j["checks"] = s.checks;
    j["violations"] = s.violations;
    j["ok"] = s.ok();
    if (!s.messages.empty()) j["messages"] = s.messages;
    std::cout << j.dump() << '\n';
    ok = ok && s.ok();
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak descriptor k-CAS benchmark"};
  app.require_subcommand(1);
  Flags flags;

  auto* bench = app.add_subcommand("bench", "Run the k-CAS increment microbenchmark");
  auto* stress = app.add_subcommand(
      "stress", "Benchmark trials in child processes, wasteful records canary-checked");
  auto* wrap = app.add_subcommand("wraparound", "Failure statistics at a small sequence width");
  auto* self = app.add_subcommand("selftest", "Sequential oracle and sequence-number checks");
  for (auto* cmd : {bench, stress, wrap, self}) add_common(cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  try {
    if (*bench) return run_trials(flags, false, false);
    if (*stress) return run_trials(flags, true, true);
    if (*wrap) return run_wraparound_cmd(flags);
    return run_selftest(flags);
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
