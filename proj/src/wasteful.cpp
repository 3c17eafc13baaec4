#include "weakdesc/wasteful.hpp"

#include <new>
#include <string>

#include "weakdesc/errors.hpp"

namespace weakdesc {

EpochReclaimer::EpochReclaimer(ProcessRegistry& registry, FootprintLedger* ledger,
                               ReclaimerOptions options)
    : registry_(registry),
      ledger_(ledger),
      options_(options),
      procs_(std::make_unique<ProcState[]>(registry.capacity())) {
  if (options_.advance_interval == 0) options_.advance_interval = 1;
}

EpochReclaimer::~EpochReclaimer() {
  for (std::size_t p = 0; p < registry_.capacity(); ++p) {
    for (Bag& bag : procs_[p].bags) {
      for (Retired r : bag.items) ::operator delete(static_cast<void*>(r.record));
    }
  }
  for (Retired r : quarantined_) ::operator delete(static_cast<void*>(r.record));
}

void EpochReclaimer::enter(ProcessId p) {
  ProcState& ps = procs_[p];
  if (ps.depth++ > 0) return;
  const std::uint64_t e = global_epoch_.load(std::memory_order_seq_cst);
  ps.announced.store(e, std::memory_order_seq_cst);
  ps.active.store(true, std::memory_order_seq_cst);
  collect(p, e);
}

void EpochReclaimer::exit(ProcessId p) {
  ProcState& ps = procs_[p];
  if (ps.depth == 0) {
    throw ContractError("epoch exit without matching enter for process " + std::to_string(p));
  }
  if (--ps.depth > 0) return;
  ps.active.store(false, std::memory_order_seq_cst);
  if (++ps.ops % options_.advance_interval == 0) try_advance();
}

void EpochReclaimer::retire(ProcessId p, Cell* record, std::size_t words) {
  ProcState& ps = procs_[p];
  const std::uint64_t e = global_epoch_.load(std::memory_order_seq_cst);
  Bag& bag = ps.bags[e % 3];
  if (bag.epoch != e) {
    // Same index, older generation: its epoch is at most e - 3.
    free_bag(p, bag);
    bag.epoch = e;
  }
  bag.items.push_back(Retired{record, words});
}

bool EpochReclaimer::try_advance() {
  std::uint64_t e = global_epoch_.load(std::memory_order_seq_cst);
  const std::size_t n = registry_.count();
  for (std::size_t i = 0; i < n; ++i) {
    const ProcState& ps = procs_[i];
    if (ps.active.load(std::memory_order_seq_cst) &&
        ps.announced.load(std::memory_order_seq_cst) != e) {
      return false;
    }
  }
  return global_epoch_.compare_exchange_strong(e, e + 1, std::memory_order_seq_cst);
}

std::size_t EpochReclaimer::pending(ProcessId p) const {
  std::size_t n = 0;
  for (const Bag& bag : procs_[p].bags) n += bag.items.size();
  return n;
}

void EpochReclaimer::collect(ProcessId p, std::uint64_t epoch) {
  for (Bag& bag : procs_[p].bags) {
    if (!bag.items.empty() && bag.epoch + 2 <= epoch) free_bag(p, bag);
  }
}

void EpochReclaimer::free_bag(ProcessId p, Bag& bag) {
  for (Retired r : bag.items) free_record(p, r);
  bag.items.clear();
}

void EpochReclaimer::free_record(ProcessId p, Retired r) {
  if (ledger_ != nullptr) ledger_->on_free(p, r.words * sizeof(Word));
  if (options_.quarantine) {
    for (std::size_t i = 0; i < r.words; ++i) {
      r.record[i].store(kCanary, std::memory_order_seq_cst);
    }
    std::lock_guard lock(quarantine_mu_);
    quarantined_.push_back(r);
    return;
  }
  ::operator delete(static_cast<void*>(r.record));
}

AllocatingTable::AllocatingTable(DescriptorSchema schema, ProcessRegistry& registry,
                                 EpochReclaimer& reclaimer)
    : schema_(std::move(schema)),
      registry_(registry),
      reclaimer_(reclaimer),
      record_words_(1 + schema_.immutable_count()) {}

DescriptorHandle AllocatingTable::create_new(ProcessId p, std::span<const Word> immutables,
                                             std::span<const Word> mutable_init) {
  registry_.require_caller(p);
  schema_.check_immutables(immutables);
  const Word packed = schema_.pack_mutables(mutable_init);

  Cell* rec = static_cast<Cell*>(::operator new(record_bytes()));
  new (&rec[0]) Cell(packed);
  for (std::size_t i = 0; i < immutables.size(); ++i) new (&rec[1 + i]) Cell(immutables[i]);
  std::atomic_thread_fence(std::memory_order_seq_cst);
  if (FootprintLedger* ledger = reclaimer_.ledger()) ledger->on_alloc(p, record_bytes());
  return DescriptorHandle(reinterpret_cast<Word>(rec));
}

Word AllocatingTable::read_field(DescriptorHandle h, FieldRef f, Word) const {
  return *read_field(h, f);
}

std::optional<Word> AllocatingTable::read_field(DescriptorHandle h, FieldRef f) const {
  const Cell* rec = record(h);
  hook(HookPoint::slot_field_read);
  if (f.is_mutable()) {
    const Word m = rec[0].load(std::memory_order_seq_cst);
    note_canary(m);
    return f.extract(m);
  }
  if (f.index >= schema_.immutable_count()) {
    throw SchemaError("immutable field index out of range in " + schema_.type_name());
  }
  const Word v = rec[1 + f.index].load(std::memory_order_seq_cst);
  note_canary(v);
  return v;
}

bool AllocatingTable::read_immutables(DescriptorHandle h, std::span<Word> out) const {
  if (out.size() > schema_.immutable_count()) {
    throw SchemaError("read_immutables asks for " + std::to_string(out.size()) +
                      " fields of " + schema_.type_name());
  }
  const Cell* rec = record(h);
  for (std::size_t i = 0; i < out.size(); ++i) {
    hook(HookPoint::slot_field_read);
    out[i] = rec[1 + i].load(std::memory_order_seq_cst);
    note_canary(out[i]);
  }
  return true;
}

std::optional<std::vector<Word>> AllocatingTable::read_immutables(DescriptorHandle h) const {
  std::vector<Word> values(schema_.immutable_count());
  read_immutables(h, std::span<Word>(values));
  return values;
}

void AllocatingTable::write_field(DescriptorHandle h, FieldRef f, Word value) {
  schema_.check_mutable_value(f, value);
  Cell& m = record(h)[0];
  hook(HookPoint::slot_mutables_read);
  Word expected = m.load(std::memory_order_seq_cst);
  for (;;) {
    note_canary(expected);
    hook(HookPoint::slot_mutables_cas);
    if (m.compare_exchange_strong(expected, f.insert(expected, value),
                                  std::memory_order_seq_cst)) {
      return;
    }
  }
}

std::optional<Word> AllocatingTable::cas_field(DescriptorHandle h, FieldRef f, Word fexp,
                                               Word fnew) {
  schema_.check_mutable_value(f, fnew);
  Cell& m = record(h)[0];
  hook(HookPoint::slot_mutables_read);
  Word expected = m.load(std::memory_order_seq_cst);
  for (;;) {
    note_canary(expected);
    const Word current = f.extract(expected);
    if (current != fexp) return current;
    hook(HookPoint::slot_mutables_cas);
    if (m.compare_exchange_strong(expected, f.insert(expected, fnew),
                                  std::memory_order_seq_cst)) {
      return fnew;
    }
  }
}

}  // namespace weakdesc
