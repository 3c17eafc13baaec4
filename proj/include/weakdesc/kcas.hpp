#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "weakdesc/cells.hpp"
#include "weakdesc/dcss.hpp"
#include "weakdesc/descriptor_store.hpp"
#include "weakdesc/hooks.hpp"
#include "weakdesc/schema.hpp"
#include "weakdesc/word.hpp"

namespace weakdesc {

inline constexpr std::size_t kDefaultKmax = 16;
inline constexpr std::size_t kKmaxLimit = 64;

// k-CAS descriptor: immutable count, then (addr, exp, new) per entry up to
// kmax; one mutable 2-bit state.
inline DescriptorSchema kcas_schema(std::size_t kmax = kDefaultKmax) {
  std::vector<FieldSpec> fields{{"count"}};
  for (std::size_t i = 0; i < kmax; ++i) {
    fields.push_back({"addr" + std::to_string(i)});
    fields.push_back({"exp" + std::to_string(i)});
    fields.push_back({"new" + std::to_string(i)});
  }
  fields.push_back({"state", true, 2});
  return DescriptorSchema("kCASdes", std::move(fields));
}

struct KcasEntry {
  CellRef cell;
  Word expected;
  Word desired;
};

struct KcasOptions {
  std::size_t kmax = kDefaultKmax;
  DcssHelpStyle dcss_help = DcssHelpStyle::read_immutables;
};

// k-word compare-and-swap on top of Dcss and a descriptor provider. Each
// process holds one k-CAS descriptor and one DCSS descriptor at a time.
template <DescriptorStore Store>
class Kcas {
 public:
  Kcas(Store& dcss_store, Store& kcas_store, KcasOptions options = {})
      : store_(kcas_store),
        kmax_(options.kmax),
        count_(kcas_store.schema().field("count")),
        state_(kcas_store.schema().field("state")),
        dcss_(dcss_store, &kcas_store, state_, options.dcss_help) {
    if (kmax_ == 0 || kmax_ > kKmaxLimit) {
      throw ContractError("kmax must be in [1, " + std::to_string(kKmaxLimit) + "]");
    }
    if (kcas_store.schema().immutable_count() != 1 + 3 * kmax_) {
      throw SchemaError("k-CAS store schema does not match kmax " + std::to_string(kmax_));
    }
  }

  // Atomically: if every cell holds its expected value, store every desired
  // value and return true; otherwise return false. Entries are locked in
  // ascending (array_id, index) order.
  bool kcas(ProcessId p, std::span<const KcasEntry> entries) {
    const std::size_t k = entries.size();
    if (k == 0 || k > kmax_) {
      throw ContractError("k-CAS needs 1 to " + std::to_string(kmax_) + " entries, got " +
                          std::to_string(k));
    }
    std::array<KcasEntry, kKmaxLimit> sorted;
    std::copy(entries.begin(), entries.end(), sorted.begin());
    std::sort(sorted.begin(), sorted.begin() + k,
              [](const KcasEntry& a, const KcasEntry& b) { return a.cell < b.cell; });
    for (std::size_t i = 0; i < k; ++i) {
      if (!is_application_value(sorted[i].expected) || !is_application_value(sorted[i].desired)) {
        throw EncodingError("k-CAS expected/new values must have tag bits clear");
      }
      if (i > 0 && sorted[i - 1].cell == sorted[i].cell) {
        throw ContractError("k-CAS entries reference the same cell twice");
      }
    }

    std::array<Word, 1 + 3 * kKmaxLimit> fields{};
    fields[0] = k;
    for (std::size_t i = 0; i < k; ++i) {
      fields[1 + 3 * i] = reinterpret_cast<Word>(&sorted[i].cell.cell());
      fields[2 + 3 * i] = sorted[i].expected;
      fields[3 + 3 * i] = sorted[i].desired;
    }
    const std::array<Word, 1> mut{status_word(KcasStatus::undecided)};

    OpScope scope(store_, p);
    const DescriptorHandle des =
        store_.create_new(p, std::span<const Word>(fields.data(), 1 + 3 * kmax_), mut);
    const bool ok = help(p, flag(des, FlagKind::kcas));
    store_.release(p, des);
    return ok;
  }

  bool kcas(ProcessId p, std::initializer_list<KcasEntry> entries) {
    return kcas(p, std::span<const KcasEntry>(entries.begin(), entries.size()));
  }

  Word read(ProcessId p, const CellArray& arr, std::size_t idx) {
    return read(p, arr.ref(idx).cell());
  }

  // Returns an application value, helping any k-CAS or DCSS found first.
  Word read(ProcessId p, Cell& c) {
    OpScope scope(store_, p);
    for (;;) {
      const Word r = dcss_.read(p, c);
      if (!is_flagged(r, FlagKind::kcas)) return r;
      help(p, r);
    }
  }

  // Drives the k-CAS named by fdes to completion. Any invalid descriptor
  // read means the operation is already over, so the helper just returns.
  bool help(ProcessId p, Word fdes) {
    hook(HookPoint::kcas_help_begin);
    const DescriptorHandle des = unflag(fdes, FlagKind::kcas);

    const auto count = store_.read_field(des, count_);
    if (!count) return false;
    const std::size_t k = std::min<std::size_t>(*count, kmax_);
    // Layout: [count, addr_0, exp_0, new_0, addr_1, ...]
    std::array<Word, 1 + 3 * kKmaxLimit> v;
    if (!store_.read_immutables(des, std::span<Word>(v.data(), 1 + 3 * k))) return false;
    auto cell_at = [&](std::size_t i) -> Cell& { return *reinterpret_cast<Cell*>(v[1 + 3 * i]); };
    auto expected_at = [&](std::size_t i) { return v[2 + 3 * i]; };
    auto desired_at = [&](std::size_t i) { return v[3 + 3 * i]; };

    // Phase 1: lock every cell with fdes, but only while state is Undecided.
    // The DCSS operand 1 is (des, state); its expected value Undecided.
    const auto initial = store_.read_field(des, state_);
    if (!initial) return false;
    if (*initial == status_word(KcasStatus::undecided)) {
      Word outcome = status_word(KcasStatus::succeeded);
      for (std::size_t i = 0; i < k; ++i) {
        const Word e = expected_at(i);
        for (;;) {
          hook(HookPoint::kcas_lock_entry);
          const Word val = dcss_.dcss(p, Operand1::kcas_state(des),
                                      status_word(KcasStatus::undecided), cell_at(i), e, fdes);
          if (is_flagged(val, FlagKind::kcas)) {
            if (val != fdes) {
              help(p, val);
              continue;
            }
          } else if (val != e) {
            outcome = status_word(KcasStatus::failed);
          }
          break;
        }
        if (outcome == status_word(KcasStatus::failed)) break;
      }
      if (!store_.cas_field(des, state_, status_word(KcasStatus::undecided), outcome)) {
        return false;
      }
    }

    // Phase 2: replace fdes with the new values, or restore the old ones.
    hook(HookPoint::kcas_decided);
    const auto state = store_.read_field(des, state_);
    if (!state) return false;
    const bool succeeded = *state == status_word(KcasStatus::succeeded);
    for (std::size_t i = 0; i < k; ++i) {
      hook(HookPoint::kcas_unlock_entry);
      cell_cas(cell_at(i), fdes, succeeded ? desired_at(i) : expected_at(i));
    }
    return succeeded;
  }

  std::size_t kmax() const { return kmax_; }
  Dcss<Store>& dcss() { return dcss_; }
  Store& store() { return store_; }
  FieldRef state_field() const { return state_; }

 private:
  Store& store_;
  std::size_t kmax_;
  FieldRef count_;
  FieldRef state_;
  Dcss<Store> dcss_;
};

}  // namespace weakdesc
