#include "weakdesc/harness.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <random>
#include <thread>

#include "weakdesc/errors.hpp"
#include "weakdesc/providers.hpp"

namespace weakdesc::harness {

namespace {

using Clock = std::chrono::steady_clock;

std::mt19937_64 worker_rng(std::uint64_t seed, std::size_t thread_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(thread_index)};
  return std::mt19937_64(seq);
}

SystemOptions system_options(const BenchConfig& cfg) {
  SystemOptions o;
  o.max_processes = cfg.threads;
  o.kmax = std::max(cfg.k, kDefaultKmax);
  o.seq_bits = cfg.seq_bits;
  o.quarantine = cfg.quarantine;
  return o;
}

template <class System>
void worker_loop(System& sys, CellArray& array, const BenchConfig& cfg, std::size_t t,
                 std::atomic<std::size_t>& registered, const std::atomic<bool>& go,
                 const std::atomic<bool>& stop, ThreadStats& stats) {
  const ProcessId p = sys.registry.register_process();
  registered.fetch_add(1);
  auto rng = worker_rng(cfg.seed, t);
  std::uniform_int_distribution<std::size_t> pick(0, cfg.size - 1);
  std::array<std::size_t, kKmaxLimit> idx{};
  std::array<KcasEntry, kKmaxLimit> entries{};

  while (!go.load(std::memory_order_acquire)) std::this_thread::yield();

  ThreadStats local;
  while (cfg.ops_per_thread != 0 ? local.ops < cfg.ops_per_thread
                                 : !stop.load(std::memory_order_relaxed)) {
    for (std::size_t i = 0; i < cfg.k; ++i) {
      std::size_t x;
      do {
        x = pick(rng);
      } while (std::find(idx.begin(), idx.begin() + i, x) != idx.begin() + i);
      idx[i] = x;
    }
    for (std::size_t i = 0; i < cfg.k; ++i) {
      const Word v = sys.kcas.read(p, array.cell(idx[i]));
      entries[i] = KcasEntry{CellRef{&array, idx[i]}, v, v + kIncrement};
    }
    ++local.ops;
    if (sys.kcas.kcas(p, std::span<const KcasEntry>(entries.data(), cfg.k))) ++local.successes;
  }
  stats = local;
}

// Runs the trial. If `on_livelock` is set and the workers are still running
// one full duration after the stop signal, it is called instead of joining;
// it must not return.
template <class System>
TrialResult execute(const BenchConfig& cfg,
                    const std::function<void(const TrialResult&)>& on_livelock) {
  System sys(system_options(cfg));
  CellArray array(cfg.size, 0);

  TrialResult result;
  result.config = cfg;
  result.per_thread.assign(cfg.threads, {});

  std::atomic<std::size_t> registered{0};
  std::atomic<std::size_t> finished{0};
  std::atomic<bool> go{false};
  std::atomic<bool> stop{false};

  std::vector<std::thread> workers;
  workers.reserve(cfg.threads);
  for (std::size_t t = 0; t < cfg.threads; ++t) {
    workers.emplace_back([&, t] {
      worker_loop(sys, array, cfg, t, registered, go, stop, result.per_thread[t]);
      finished.fetch_add(1);
    });
  }
  while (registered.load() < cfg.threads) std::this_thread::yield();

  const auto start = Clock::now();
  go.store(true, std::memory_order_release);

  auto stopped_at = start;
  if (cfg.ops_per_thread == 0) {
    std::this_thread::sleep_until(start + std::chrono::milliseconds(cfg.duration_ms));
    stop.store(true);
    stopped_at = Clock::now();
  }
  if (on_livelock) {
    // Measured from the stop signal: with more workers than cores this
    // thread itself may wake well after the planned end.
    const auto deadline = stopped_at + std::chrono::milliseconds(cfg.duration_ms);
    while (finished.load() < cfg.threads) {
      if (cfg.ops_per_thread == 0 && Clock::now() >= deadline) {
        result.error_kind = ErrorKind::livelock_timeout;
        on_livelock(result);
      }
      std::this_thread::sleep_for(std::chrono::microseconds(200));
    }
  }
  for (auto& w : workers) w.join();
  const auto end = Clock::now();

  result.elapsed_us = std::chrono::duration<double, std::micro>(end - start).count();
  for (const auto& s : result.per_thread) {
    result.ops += s.ops;
    result.successes += s.successes;
  }
  result.throughput_ops_per_us =
      result.elapsed_us > 0 ? static_cast<double>(result.ops) / result.elapsed_us : 0.0;
  result.flagged_cells = count_flagged(array);
  result.checksum_ok = result.flagged_cells == 0 && validate_checksum(array, cfg.k, result.successes);
  result.footprint_bytes = sys.ledger.aggregate_max_footprint();
  result.canary_hits = sys.canary_hits();
  if (!result.checksum_ok) result.error_kind = ErrorKind::checksum;
  return result;
}

TrialResult dispatch(const BenchConfig& cfg,
                     const std::function<void(const TrialResult&)>& on_livelock) {
  cfg.validate();
  if (cfg.provider == ProviderKind::reuse) return execute<ReuseSystem>(cfg, on_livelock);
  return execute<WastefulSystem>(cfg, on_livelock);
}

// Fixed-size record sent from the child process.
struct WireResult {
  std::uint64_t ops;
  std::uint64_t successes;
  double elapsed_us;
  double throughput;
  std::uint64_t checksum_ok;
  std::uint64_t flagged_cells;
  std::uint64_t footprint_bytes;
  std::uint64_t canary_hits;
  std::uint64_t error_kind;
};

WireResult to_wire(const TrialResult& r) {
  return {r.ops,
          r.successes,
          r.elapsed_us,
          r.throughput_ops_per_us,
          r.checksum_ok,
          r.flagged_cells,
          r.footprint_bytes,
          r.canary_hits,
          static_cast<std::uint64_t>(r.error_kind)};
}

[[noreturn]] void send_and_exit(int fd, const TrialResult& r) {
  const WireResult w = to_wire(r);
  const char* data = reinterpret_cast<const char*>(&w);
  std::size_t left = sizeof w;
  while (left > 0) {
    const ssize_t n = ::write(fd, data, left);
    if (n <= 0) _exit(3);
    data += n;
    left -= static_cast<std::size_t>(n);
  }
  _exit(0);
}

}  // namespace

std::string_view to_string(ProviderKind p) {
  return p == ProviderKind::reuse ? "reuse" : "wasteful";
}

std::string_view to_string(ErrorKind e) {
  switch (e) {
    case ErrorKind::none: return "none";
    case ErrorKind::checksum: return "checksum";
    case ErrorKind::livelock_timeout: return "livelock_timeout";
    case ErrorKind::fault: return "fault";
  }
  return "unknown";
}

std::optional<ProviderKind> parse_provider(std::string_view s) {
  if (s == "reuse") return ProviderKind::reuse;
  if (s == "wasteful") return ProviderKind::wasteful;
  return std::nullopt;
}

void BenchConfig::validate() const {
  if (threads < 1 || threads > kMaxProcesses) throw ContractError("threads must be in [1, 16384]");
  if (k < 1 || k > kKmaxLimit) throw ContractError("k must be in [1, 64]");
  if (size < k) throw ContractError("array size must be at least k");
  if (seq_bits < 2 || seq_bits > 48) throw ContractError("seq_bits must be in [2, 48]");
  if (ops_per_thread == 0 && duration_ms == 0) {
    throw ContractError("either a duration or an op budget is required");
  }
}

std::uint64_t array_sum(const CellArray& array) {
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < array.size(); ++i) sum += array.read(i) >> kValueShift;
  return sum;
}

bool validate_checksum(const CellArray& array, std::size_t k, std::uint64_t total_successes) {
  return array_sum(array) == k * total_successes;
}

std::uint64_t count_flagged(const CellArray& array) {
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < array.size(); ++i) n += !is_application_value(array.read(i));
  return n;
}

TrialResult run_kcas_trial(const BenchConfig& cfg) { return dispatch(cfg, {}); }

TrialResult run_isolated_trial(const BenchConfig& cfg) {
  cfg.validate();
  int fds[2];
  if (::pipe(fds) != 0) throw Error(std::string("pipe: ") + std::strerror(errno));

  const pid_t pid = ::fork();
  if (pid < 0) throw Error(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::close(fds[0]);
    const int out = fds[1];
    try {
      const TrialResult r = dispatch(cfg, [out](const TrialResult& partial) {
        send_and_exit(out, partial);
      });
      send_and_exit(out, r);
    } catch (...) {
      _exit(4);
    }
  }
  ::close(fds[1]);

  TrialResult result;
  result.config = cfg;

  // The child enforces the 2x watchdog itself; this outer bound only catches
  // a child too wedged to report.
  const auto hard_limit =
      std::chrono::milliseconds(cfg.ops_per_thread ? 600000 : 4 * cfg.duration_ms + 5000);
  const auto deadline = Clock::now() + hard_limit;
  WireResult wire{};
  std::size_t got = 0;
  bool timed_out = false;
  while (got < sizeof wire) {
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    if (remaining <= 0) {
      timed_out = true;
      break;
    }
    pollfd pfd{fds[0], POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(remaining));
    if (rc < 0 && errno == EINTR) continue;
    if (rc == 0) {
      timed_out = true;
      break;
    }
    const ssize_t n = ::read(fds[0], reinterpret_cast<char*>(&wire) + got, sizeof wire - got);
    if (n <= 0) break;
    got += static_cast<std::size_t>(n);
  }
  ::close(fds[0]);
  if (timed_out) ::kill(pid, SIGKILL);

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }

  if (got == sizeof wire) {
    result.ops = wire.ops;
    result.successes = wire.successes;
    result.elapsed_us = wire.elapsed_us;
    result.throughput_ops_per_us = wire.throughput;
    result.checksum_ok = wire.checksum_ok != 0;
    result.flagged_cells = wire.flagged_cells;
    result.footprint_bytes = wire.footprint_bytes;
    result.canary_hits = wire.canary_hits;
    result.error_kind = static_cast<ErrorKind>(wire.error_kind);
  } else if (timed_out) {
    result.error_kind = ErrorKind::livelock_timeout;
  } else if (WIFSIGNALED(status)) {
    result.error_kind = ErrorKind::fault;
  } else {
    throw Error("trial child exited with status " + std::to_string(WEXITSTATUS(status)) +
                " without a result");
  }
  return result;
}

WraparoundSummary run_wraparound(const BenchConfig& cfg,
                                 const std::function<void(const TrialResult&)>& on_trial) {
  if (cfg.provider != ProviderKind::reuse) {
    throw ContractError("the wraparound experiment needs the reuse provider");
  }
  WraparoundSummary summary;
  summary.seq_bits = cfg.seq_bits;
  summary.trials = cfg.trials;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    BenchConfig trial_cfg = cfg;
    trial_cfg.seed = cfg.seed + t;
    TrialResult r = run_isolated_trial(trial_cfg);
    switch (r.error_kind) {
      case ErrorKind::checksum: ++summary.checksum_errors; break;
      case ErrorKind::livelock_timeout: ++summary.livelocks; break;
      case ErrorKind::fault: ++summary.faults; break;
      case ErrorKind::none: break;
    }
    if (on_trial) on_trial(r);
    summary.results.push_back(std::move(r));
  }
  return summary;
}

}  // namespace weakdesc::harness
