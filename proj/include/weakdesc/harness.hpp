#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "weakdesc/cells.hpp"

namespace weakdesc::harness {

enum class ProviderKind { reuse, wasteful };
enum class ErrorKind { none, checksum, livelock_timeout, fault };

std::string_view to_string(ProviderKind p);
std::string_view to_string(ErrorKind e);
std::optional<ProviderKind> parse_provider(std::string_view s);

// Increments are stored shifted left by two so tag bits stay clear.
inline constexpr unsigned kValueShift = 2;
inline constexpr Word kIncrement = Word{1} << kValueShift;

struct BenchConfig {
  ProviderKind provider = ProviderKind::reuse;
  std::size_t threads = 1;
  std::size_t size = std::size_t{1} << 14;
  std::size_t k = 16;
  std::uint64_t duration_ms = 1000;
  // Nonzero: each worker performs exactly this many k-CAS attempts and the
  // duration is ignored. Makes single-threaded runs reproducible.
  std::uint64_t ops_per_thread = 0;
  unsigned seq_bits = 48;
  std::uint64_t seed = 1;
  std::size_t trials = 1;
  // Wasteful provider: canary-fill freed descriptors instead of freeing.
  bool quarantine = false;

  // Throws ContractError on an invalid combination.
  void validate() const;
};

struct ThreadStats {
  std::uint64_t ops = 0;
  std::uint64_t successes = 0;
};

struct TrialResult {
  BenchConfig config;
  std::uint64_t ops = 0;
  std::uint64_t successes = 0;
  std::vector<ThreadStats> per_thread;
  double elapsed_us = 0;
  double throughput_ops_per_us = 0;
  bool checksum_ok = false;
  std::uint64_t flagged_cells = 0;  // after quiescence; must be 0
  std::uint64_t footprint_bytes = 0;
  std::uint64_t canary_hits = 0;
  ErrorKind error_kind = ErrorKind::none;

  bool passed() const {
    return error_kind == ErrorKind::none && checksum_ok && flagged_cells == 0 &&
           canary_hits == 0;
  }
};

// Pure arithmetic over a quiescent array: sum of unshifted values must be
// k times the number of successful k-CAS operations.
bool validate_checksum(const CellArray& array, std::size_t k, std::uint64_t total_successes);
std::uint64_t array_sum(const CellArray& array);
// Cells still holding a DCSS- or k-CAS-flagged word.
std::uint64_t count_flagged(const CellArray& array);

// The k-CAS increment microbenchmark, in-process.
TrialResult run_kcas_trial(const BenchConfig& cfg);

// Same trial in a forked child. A child that outlives twice the trial
// duration is killed and reported as livelock_timeout; one killed by a
// signal is reported as fault.
TrialResult run_isolated_trial(const BenchConfig& cfg);

struct WraparoundSummary {
  unsigned seq_bits = 0;
  std::size_t trials = 0;
  std::size_t checksum_errors = 0;
  std::size_t livelocks = 0;
  std::size_t faults = 0;
  std::vector<TrialResult> results;

  std::size_t failures() const { return checksum_errors + livelocks + faults; }
  double failure_fraction() const {
    return trials == 0 ? 0.0 : static_cast<double>(failures()) / static_cast<double>(trials);
  }
};

// cfg.trials isolated trials at width cfg.seq_bits (reuse provider only).
// `on_trial` sees each result as it completes.
WraparoundSummary run_wraparound(const BenchConfig& cfg,
                                 const std::function<void(const TrialResult&)>& on_trial = {});

}  // namespace weakdesc::harness
