#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "weakdesc/cells.hpp"
#include "weakdesc/process.hpp"
#include "weakdesc/schema.hpp"
#include "weakdesc/word.hpp"

namespace weakdesc {

struct TableOptions {
  // Width of the sequence number; arithmetic wraps silently modulo 2^B.
  unsigned seq_bits = DescriptorHandle::kSeqBits;
};

// Extended weak descriptor ADT backed by one reusable slot per process.
//
// A slot is a 128-byte aligned block of words:
//   word 0      mutables: seq in bits 16..16+B, mutable fields in bits 0..13
//   word 1..N   immutable fields
// padded up to a multiple of 128 bytes. A handle <p, s> is valid while
// slot p holds sequence number s. create_new bumps the sequence number to
// an odd value, rewrites the fields, then bumps it to the next even value,
// so every handle in circulation carries an even number and readers that
// race with reinitialization fail validation.
class DescriptorTable {
 public:
  DescriptorTable(DescriptorSchema schema, ProcessRegistry& registry,
                  FootprintLedger* ledger = nullptr, TableOptions options = {});
  ~DescriptorTable();

  DescriptorTable(const DescriptorTable&) = delete;
  DescriptorTable& operator=(const DescriptorTable&) = delete;

  // Owner-only. Invalidates every earlier handle of (this type, p).
  DescriptorHandle create_new(ProcessId p, std::span<const Word> immutables,
                              std::span<const Word> mutable_init);

  // Returns dv if h is no longer valid.
  Word read_field(DescriptorHandle h, FieldRef f, Word dv) const;
  // The weak form: nullopt stands for the invalid result.
  std::optional<Word> read_field(DescriptorHandle h, FieldRef f) const;

  // Reads the first out.size() immutable fields; false if h is invalid.
  bool read_immutables(DescriptorHandle h, std::span<Word> out) const;
  std::optional<std::vector<Word>> read_immutables(DescriptorHandle h) const;

  // No effect if h is invalid.
  void write_field(DescriptorHandle h, FieldRef f, Word value);

  // nullopt if h is invalid; otherwise the witnessed field value on a failed
  // compare, or fnew on success.
  std::optional<Word> cas_field(DescriptorHandle h, FieldRef f, Word fexp, Word fnew);

  // Provider lifecycle hooks. Reusable slots need no reclamation.
  void begin_op(ProcessId) noexcept {}
  void end_op(ProcessId) noexcept {}
  void release(ProcessId, DescriptorHandle) noexcept {}

  const DescriptorSchema& schema() const { return schema_; }
  FieldRef field(std::string_view name) const { return schema_.field(name); }
  unsigned seq_bits() const { return seq_bits_; }
  std::size_t slot_bytes() const { return slot_words_ * sizeof(Word); }
  std::size_t materialized_slots() const;

  // Introspection for tests; nullopt when p has no slot yet.
  std::optional<Word> slot_mutables(ProcessId p) const;
  std::optional<Word> slot_seq(ProcessId p) const;
  std::vector<Word> slot_snapshot(ProcessId p) const;

  Word seq_of(Word mutables) const {
    return (mutables >> DescriptorHandle::kSeqShift) & seq_mask_;
  }

 private:
  Cell* slot(ProcessId p) const {
    return p < capacity_ ? slots_[p].load(std::memory_order_acquire) : nullptr;
  }
  Cell* materialize(ProcessId p);
  Word with_seq(Word mutables, Word seq) const {
    return (mutables & ~(seq_mask_ << DescriptorHandle::kSeqShift)) |
           ((seq & seq_mask_) << DescriptorHandle::kSeqShift);
  }
  void check_field(FieldRef f) const;

  DescriptorSchema schema_;
  ProcessRegistry& registry_;
  FootprintLedger* ledger_;
  unsigned seq_bits_;
  Word seq_mask_;
  std::size_t slot_words_;
  std::size_t capacity_;
  std::unique_ptr<std::atomic<Cell*>[]> slots_;
};

}  // namespace weakdesc
