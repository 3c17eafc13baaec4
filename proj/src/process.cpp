#include "weakdesc/process.hpp"

#include <algorithm>
#include <string>

#include "weakdesc/errors.hpp"

namespace weakdesc {

ProcessRegistry::ProcessRegistry(std::size_t capacity)
    : capacity_(capacity), bindings_(std::make_unique<Binding[]>(capacity)) {
  if (capacity == 0 || capacity > kMaxProcesses) {
    throw ContractError("process registry capacity must be in [1, " +
                        std::to_string(kMaxProcesses) + "]");
  }
}

ProcessId ProcessRegistry::register_process() {
  std::size_t id = next_.load(std::memory_order_relaxed);
  do {
    if (id >= capacity_) {
      throw ContractError("process registry full (capacity " +
                          std::to_string(capacity_) + ")");
    }
  } while (!next_.compare_exchange_weak(id, id + 1, std::memory_order_acq_rel));
  bindings_[id].thread.store(std::this_thread::get_id(), std::memory_order_release);
  return static_cast<ProcessId>(id);
}

bool ProcessRegistry::is_caller(ProcessId p) const {
  return p < capacity_ &&
         bindings_[p].thread.load(std::memory_order_acquire) == std::this_thread::get_id();
}

void ProcessRegistry::require_caller(ProcessId p) const {
  if (!is_caller(p)) {
    throw ContractError("process id " + std::to_string(p) +
                        " is not registered to the calling thread");
  }
}

FootprintLedger::FootprintLedger(std::size_t capacity)
    : capacity_(capacity), entries_(std::make_unique<Entry[]>(capacity)) {}

void FootprintLedger::on_alloc(ProcessId p, std::size_t bytes) {
  Entry& e = entries_[p];
  const auto malloced = e.total_malloc.load(std::memory_order_relaxed) + bytes;
  e.total_malloc.store(malloced, std::memory_order_relaxed);
  const auto live = malloced - e.total_free.load(std::memory_order_relaxed);
  if (live > e.max_footprint.load(std::memory_order_relaxed)) {
    e.max_footprint.store(live, std::memory_order_relaxed);
  }
}

void FootprintLedger::on_free(ProcessId p, std::size_t bytes) {
  Entry& e = entries_[p];
  e.total_free.store(e.total_free.load(std::memory_order_relaxed) + bytes,
                     std::memory_order_relaxed);
}

FootprintLedger::Counters FootprintLedger::counters(ProcessId p) const {
  const Entry& e = entries_[p];
  return {e.total_malloc.load(), e.total_free.load(), e.max_footprint.load()};
}

std::uint64_t FootprintLedger::aggregate_max_footprint() const {
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < capacity_; ++i) sum += entries_[i].max_footprint.load();
  return sum;
}

std::uint64_t FootprintLedger::total_malloc() const {
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < capacity_; ++i) sum += entries_[i].total_malloc.load();
  return sum;
}

std::uint64_t FootprintLedger::total_free() const {
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < capacity_; ++i) sum += entries_[i].total_free.load();
  return sum;
}

}  // namespace weakdesc
