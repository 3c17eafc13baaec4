#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <thread>

namespace weakdesc {

using ProcessId = std::uint32_t;

inline constexpr std::size_t kMaxProcesses = std::size_t{1} << 14;
inline constexpr std::size_t kSlotAlign = 128;

// Hands out dense process ids. Each id is bound to the thread that
// registered it; one thread may hold several ids (useful for sequential
// simulation of many processes).
class ProcessRegistry {
 public:
  explicit ProcessRegistry(std::size_t capacity = kMaxProcesses);

  ProcessId register_process();

  std::size_t capacity() const { return capacity_; }
  // Number of ids handed out so far.
  std::size_t count() const { return next_.load(std::memory_order_acquire); }

  bool is_caller(ProcessId p) const;
  // Throws ContractError unless p was registered by the calling thread.
  void require_caller(ProcessId p) const;

 private:
  struct alignas(kSlotAlign) Binding {
    std::atomic<std::thread::id> thread{};
  };

  std::size_t capacity_;
  std::atomic<std::size_t> next_{0};
  std::unique_ptr<Binding[]> bindings_;
};

// Per-process descriptor memory accounting:
//   maxFootprint = max(maxFootprint, totalMalloc - totalFree)
// taken after every allocation. The reported footprint is the sum of the
// per-process maxima.
class FootprintLedger {
 public:
  struct Counters {
    std::uint64_t total_malloc = 0;
    std::uint64_t total_free = 0;
    std::uint64_t max_footprint = 0;
  };

  explicit FootprintLedger(std::size_t capacity = kMaxProcesses);

  void on_alloc(ProcessId p, std::size_t bytes);
  void on_free(ProcessId p, std::size_t bytes);

  Counters counters(ProcessId p) const;
  std::uint64_t aggregate_max_footprint() const;
  std::uint64_t total_malloc() const;
  std::uint64_t total_free() const;

 private:
  // Written only by the owning process; read after quiescence.
  struct alignas(kSlotAlign) Entry {
    std::atomic<std::uint64_t> total_malloc{0};
    std::atomic<std::uint64_t> total_free{0};
    std::atomic<std::uint64_t> max_footprint{0};
  };

  std::size_t capacity_;
  std::unique_ptr<Entry[]> entries_;
};

}  // namespace weakdesc
