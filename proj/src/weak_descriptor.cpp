#include "weakdesc/weak_descriptor.hpp"

#include <new>
#include <string>

#include "weakdesc/errors.hpp"
#include "weakdesc/hooks.hpp"

namespace weakdesc {

namespace {

std::size_t round_up_words(std::size_t words) {
  constexpr std::size_t per_line = kSlotAlign / sizeof(Word);
  return (words + per_line - 1) / per_line * per_line;
}

}  // namespace

DescriptorTable::DescriptorTable(DescriptorSchema schema, ProcessRegistry& registry,
                                 FootprintLedger* ledger, TableOptions options)
    : schema_(std::move(schema)),
      registry_(registry),
      ledger_(ledger),
      seq_bits_(options.seq_bits),
      seq_mask_((Word{1} << options.seq_bits) - 1),
      slot_words_(round_up_words(1 + schema_.immutable_count())),
      capacity_(registry.capacity()),
      slots_(std::make_unique<std::atomic<Cell*>[]>(registry.capacity())) {
  if (seq_bits_ < 2 || seq_bits_ > DescriptorHandle::kSeqBits) {
    throw ContractError("sequence width must be in [2, 48], got " +
                        std::to_string(seq_bits_));
  }
}

DescriptorTable::~DescriptorTable() {
  for (std::size_t p = 0; p < capacity_; ++p) {
    if (Cell* s = slots_[p].load(std::memory_order_relaxed)) {
      ::operator delete(static_cast<void*>(s), std::align_val_t{kSlotAlign});
    }
  }
}

Cell* DescriptorTable::materialize(ProcessId p) {
  void* raw = ::operator new(slot_bytes(), std::align_val_t{kSlotAlign});
  Cell* words = static_cast<Cell*>(raw);
  for (std::size_t i = 0; i < slot_words_; ++i) new (&words[i]) Cell(0);
  slots_[p].store(words, std::memory_order_release);
  if (ledger_ != nullptr) ledger_->on_alloc(p, slot_bytes());
  return words;
}

std::size_t DescriptorTable::materialized_slots() const {
  std::size_t n = 0;
  for (std::size_t p = 0; p < capacity_; ++p) n += slot(static_cast<ProcessId>(p)) != nullptr;
  return n;
}

void DescriptorTable::check_field(FieldRef f) const {
  if (!f.is_mutable() && f.index >= schema_.immutable_count()) {
    throw SchemaError("immutable field index out of range in " + schema_.type_name());
  }
}

DescriptorHandle DescriptorTable::create_new(ProcessId p, std::span<const Word> immutables,
                                             std::span<const Word> mutable_init) {
  registry_.require_caller(p);
  schema_.check_immutables(immutables);
  const Word packed = schema_.pack_mutables(mutable_init);

  Cell* s = slot(p);
  if (s == nullptr) s = materialize(p);

  // Only p changes the seq bits, so this read is current.
  const Word current = s[0].load(std::memory_order_seq_cst);
  const Word old_seq = seq_of(current);

  hook(HookPoint::slot_seq_odd);
  s[0].store(with_seq(current, old_seq + 1), std::memory_order_seq_cst);

  for (std::size_t i = 0; i < immutables.size(); ++i) {
    hook(HookPoint::slot_field_write);
    s[1 + i].store(immutables[i], std::memory_order_seq_cst);
  }

  const Word new_seq = (old_seq + 2) & seq_mask_;
  hook(HookPoint::slot_seq_even);
  s[0].store(with_seq(packed, new_seq), std::memory_order_seq_cst);
  return DescriptorHandle::make(p, new_seq);
}

Word DescriptorTable::read_field(DescriptorHandle h, FieldRef f, Word dv) const {
  return read_field(h, f).value_or(dv);
}

std::optional<Word> DescriptorTable::read_field(DescriptorHandle h, FieldRef f) const {
  check_field(f);
  const Cell* s = slot(h.owner());
  if (s == nullptr) return std::nullopt;

  hook(HookPoint::slot_field_read);
  if (f.is_mutable()) {
    // The mutables word carries the seq, so one load reads and validates.
    const Word m = s[0].load(std::memory_order_seq_cst);
    if (seq_of(m) != h.seq()) return std::nullopt;
    return f.extract(m);
  }
  const Word value = s[1 + f.index].load(std::memory_order_seq_cst);
  hook(HookPoint::slot_seq_check);
  if (seq_of(s[0].load(std::memory_order_seq_cst)) != h.seq()) return std::nullopt;
  return value;
}

bool DescriptorTable::read_immutables(DescriptorHandle h, std::span<Word> out) const {
  if (out.size() > schema_.immutable_count()) {
    throw SchemaError("read_immutables asks for " + std::to_string(out.size()) +
                      " fields of " + schema_.type_name());
  }
  const Cell* s = slot(h.owner());
  if (s == nullptr) return false;
  for (std::size_t i = 0; i < out.size(); ++i) {
    hook(HookPoint::slot_field_read);
    out[i] = s[1 + i].load(std::memory_order_seq_cst);
  }
  hook(HookPoint::slot_seq_check);
  return seq_of(s[0].load(std::memory_order_seq_cst)) == h.seq();
}

std::optional<std::vector<Word>> DescriptorTable::read_immutables(DescriptorHandle h) const {
  std::vector<Word> values(schema_.immutable_count());
  if (!read_immutables(h, std::span<Word>(values))) return std::nullopt;
  return values;
}

void DescriptorTable::write_field(DescriptorHandle h, FieldRef f, Word value) {
  schema_.check_mutable_value(f, value);
  Cell* s = slot(h.owner());
  if (s == nullptr) return;
  for (;;) {
    hook(HookPoint::slot_mutables_read);
    Word expected = s[0].load(std::memory_order_seq_cst);
    if (seq_of(expected) != h.seq()) return;
    const Word desired = f.insert(expected, value);
    hook(HookPoint::slot_mutables_cas);
    if (s[0].compare_exchange_strong(expected, desired, std::memory_order_seq_cst)) return;
  }
}

std::optional<Word> DescriptorTable::cas_field(DescriptorHandle h, FieldRef f, Word fexp,
                                               Word fnew) {
  schema_.check_mutable_value(f, fnew);
  Cell* s = slot(h.owner());
  if (s == nullptr) return std::nullopt;
  for (;;) {
    hook(HookPoint::slot_mutables_read);
    Word expected = s[0].load(std::memory_order_seq_cst);
    if (seq_of(expected) != h.seq()) return std::nullopt;
    const Word current = f.extract(expected);
    if (current != fexp) return current;
    const Word desired = f.insert(expected, fnew);
    hook(HookPoint::slot_mutables_cas);
    if (s[0].compare_exchange_strong(expected, desired, std::memory_order_seq_cst)) return fnew;
  }
}

std::optional<Word> DescriptorTable::slot_mutables(ProcessId p) const {
  const Cell* s = slot(p);
  if (s == nullptr) return std::nullopt;
  return s[0].load(std::memory_order_seq_cst);
}

std::optional<Word> DescriptorTable::slot_seq(ProcessId p) const {
  auto m = slot_mutables(p);
  if (!m) return std::nullopt;
  return seq_of(*m);
}

std::vector<Word> DescriptorTable::slot_snapshot(ProcessId p) const {
  const Cell* s = slot(p);
  if (s == nullptr) return {};
  std::vector<Word> words(slot_words_);
  for (std::size_t i = 0; i < slot_words_; ++i) words[i] = s[i].load(std::memory_order_seq_cst);
  return words;
}

}  // namespace weakdesc
