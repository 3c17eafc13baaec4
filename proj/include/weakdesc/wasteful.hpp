#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "weakdesc/cells.hpp"
#include "weakdesc/process.hpp"
#include "weakdesc/schema.hpp"
#include "weakdesc/word.hpp"

namespace weakdesc {

struct ReclaimerOptions {
  // Attempt to advance the global epoch after this many outermost
  // operations per process.
  unsigned advance_interval = 64;
  // Instead of returning freed records to the allocator, overwrite them
  // with kCanary and park them until destruction. Lets stress tests detect
  // use-after-free without undefined behaviour.
  bool quarantine = false;
};

inline constexpr Word kCanary = 0xDEADDEADDEADDEA0ull;

// Blocking epoch-based reclamation. A record retired while the global epoch
// is e is freed once the epoch reaches e + 2; the epoch only advances when
// every active process has announced the current one.
class EpochReclaimer {
 public:
  explicit EpochReclaimer(ProcessRegistry& registry, FootprintLedger* ledger = nullptr,
                          ReclaimerOptions options = {});
  ~EpochReclaimer();

  EpochReclaimer(const EpochReclaimer&) = delete;
  EpochReclaimer& operator=(const EpochReclaimer&) = delete;

  // Brackets nest; only the outermost pair announces and clears.
  void enter(ProcessId p);
  void exit(ProcessId p);

  // `words` atomics at `record`, allocated with plain operator new.
  void retire(ProcessId p, Cell* record, std::size_t words);

  // Attempts one advance; true if the global epoch moved.
  bool try_advance();

  std::uint64_t epoch() const { return global_epoch_.load(std::memory_order_seq_cst); }
  std::size_t pending(ProcessId p) const;
  bool quarantine() const { return options_.quarantine; }

  FootprintLedger* ledger() const { return ledger_; }

 private:
  struct Retired {
    Cell* record;
    std::size_t words;
  };
  struct Bag {
    std::uint64_t epoch = 0;
    std::vector<Retired> items;
  };
  struct alignas(kSlotAlign) ProcState {
    std::atomic<std::uint64_t> announced{0};
    std::atomic<bool> active{false};
    unsigned depth = 0;
    unsigned ops = 0;
    std::array<Bag, 3> bags;
  };

  void collect(ProcessId p, std::uint64_t epoch);
  void free_bag(ProcessId p, Bag& bag);
  void free_record(ProcessId p, Retired r);

  ProcessRegistry& registry_;
  FootprintLedger* ledger_;
  ReclaimerOptions options_;
  std::atomic<std::uint64_t> global_epoch_{2};
  std::unique_ptr<ProcState[]> procs_;
  std::mutex quarantine_mu_;
  std::vector<Retired> quarantined_;
};

// Mutable descriptor ADT that allocates a fresh record per create_new.
// Handles are record addresses; they never become invalid, so the
// default/invalid results of the weak interface never occur.
//
// Record layout: word 0 mutable fields (no sequence number), words 1..N
// immutable fields.
class AllocatingTable {
 public:
  AllocatingTable(DescriptorSchema schema, ProcessRegistry& registry, EpochReclaimer& reclaimer);

  AllocatingTable(const AllocatingTable&) = delete;
  AllocatingTable& operator=(const AllocatingTable&) = delete;

  DescriptorHandle create_new(ProcessId p, std::span<const Word> immutables,
                              std::span<const Word> mutable_init);

  Word read_field(DescriptorHandle h, FieldRef f, Word dv) const;
  std::optional<Word> read_field(DescriptorHandle h, FieldRef f) const;
  bool read_immutables(DescriptorHandle h, std::span<Word> out) const;
  std::optional<std::vector<Word>> read_immutables(DescriptorHandle h) const;
  void write_field(DescriptorHandle h, FieldRef f, Word value);
  std::optional<Word> cas_field(DescriptorHandle h, FieldRef f, Word fexp, Word fnew);

  void begin_op(ProcessId p) { reclaimer_.enter(p); }
  void end_op(ProcessId p) { reclaimer_.exit(p); }
  // Hands the record to the reclaimer. Call once the descriptor is
  // unreachable from shared memory.
  void release(ProcessId p, DescriptorHandle h) { reclaimer_.retire(p, record(h), record_words_); }

  const DescriptorSchema& schema() const { return schema_; }
  FieldRef field(std::string_view name) const { return schema_.field(name); }
  std::size_t record_bytes() const { return record_words_ * sizeof(Word); }

  // Count of field reads that observed the quarantine canary.
  std::uint64_t canary_hits() const { return canary_hits_.load(std::memory_order_relaxed); }

 private:
  static Cell* record(DescriptorHandle h) { return reinterpret_cast<Cell*>(h.bits()); }
  void note_canary(Word w) const {
    if (reclaimer_.quarantine() && w == kCanary) [[unlikely]] {
      canary_hits_.fetch_add(1, std::memory_order_relaxed);
    }
  }

  DescriptorSchema schema_;
  ProcessRegistry& registry_;
  EpochReclaimer& reclaimer_;
  std::size_t record_words_;
  mutable std::atomic<std::uint64_t> canary_hits_{0};
};

}  // namespace weakdesc
