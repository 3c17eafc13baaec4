#pragma once

#include <array>
#include <cstddef>

#include "weakdesc/cells.hpp"
#include "weakdesc/descriptor_store.hpp"
#include "weakdesc/hooks.hpp"
#include "weakdesc/schema.hpp"
#include "weakdesc/word.hpp"

namespace weakdesc {

// Values of the 2-bit k-CAS state field.
enum class KcasStatus : Word { undecided = 0, succeeded = 1, failed = 2 };

constexpr Word status_word(KcasStatus s) { return static_cast<Word>(s); }

// The DCSS descriptor type: every field is immutable.
inline DescriptorSchema dcss_schema() {
  return DescriptorSchema("DCSSdes", {{"addr1"}, {"exp1"}, {"addr2"}, {"exp2"}, {"new2"}});
}

// First operand of a DCSS: either a cell, or the state field of a k-CAS
// descriptor. Encoded into one descriptor word: a cell address (bit 0
// clear) or a k-CAS handle with bit 0 set.
class Operand1 {
 public:
  static Operand1 cell(CellRef ref) { return cell(ref.cell()); }
  static Operand1 cell(Cell& c) { return Operand1(reinterpret_cast<Word>(&c)); }
  static Operand1 kcas_state(DescriptorHandle h) { return Operand1(h.bits() | 1u); }
  static Operand1 decode(Word bits) { return Operand1(bits); }

  Word encoded() const { return bits_; }
  bool is_kcas_state() const { return (bits_ & 1u) != 0; }
  DescriptorHandle kcas_handle() const { return DescriptorHandle(bits_ & ~Word{1}); }
  Cell& cell_ref() const { return *reinterpret_cast<Cell*>(bits_); }

 private:
  explicit Operand1(Word bits) : bits_(bits) {}
  Word bits_;
};

struct DcssOperands {
  Operand1 a1;
  Word e1;
  CellRef a2;
  Word e2;
  Word n2;
};

// How help() gets at the descriptor's fields. field_by_field reads and
// validates one field at a time and exists to cross-check the default.
enum class DcssHelpStyle { read_immutables, field_by_field };

// Double-compare single-swap over cells, on any descriptor provider.
template <DescriptorStore Store>
class Dcss {
 public:
  explicit Dcss(Store& store, Store* kcas_store = nullptr, FieldRef kcas_state_field = {},
                DcssHelpStyle style = DcssHelpStyle::read_immutables)
      : store_(store),
        kcas_store_(kcas_store),
        kcas_state_(kcas_state_field),
        style_(style),
        addr1_(store.schema().field("addr1")),
        exp1_(store.schema().field("exp1")),
        addr2_(store.schema().field("addr2")),
        exp2_(store.schema().field("exp2")),
        new2_(store.schema().field("new2")) {}

  // If the operand-1 value equals e1 and a2 holds e2, sets a2 to n2.
  // Returns e2 on success, otherwise the conflicting content of a2 (never
  // a DCSS-flagged word).
  Word dcss(ProcessId p, const DcssOperands& ops) {
    if (is_flagged(ops.e2, FlagKind::dcss) || is_flagged(ops.n2, FlagKind::dcss)) {
      throw EncodingError("dcss expected/new values must not be DCSS-flagged");
    }
    if (ops.a1.is_kcas_state() && kcas_store_ == nullptr) {
      throw ContractError("dcss on a k-CAS state operand needs a k-CAS store");
    }
    return dcss(p, ops.a1, ops.e1, ops.a2.cell(), ops.e2, ops.n2);
  }

  // Unchecked form used by k-CAS.
  Word dcss(ProcessId p, Operand1 a1, Word e1, Cell& a2, Word e2, Word n2) {
    OpScope scope(store_, p);
    const std::array<Word, 5> fields{a1.encoded(), e1, reinterpret_cast<Word>(&a2), e2, n2};
    const DescriptorHandle des = store_.create_new(p, fields, {});
    const Word fdes = flag(des, FlagKind::dcss);
    Word r;
    for (;;) {
      r = cell_cas(a2, e2, fdes);
      if (!is_flagged(r, FlagKind::dcss)) break;
      help(p, r);
    }
    if (r == e2) {
      hook(HookPoint::dcss_published);
      help(p, fdes);
    }
    store_.release(p, des);
    return r;
  }

  Word read(ProcessId p, const CellArray& arr, std::size_t idx) {
    return read(p, arr.ref(idx).cell());
  }

  // Returns the cell content with the DCSS bit clear, helping first.
  Word read(ProcessId p, Cell& c) {
    OpScope scope(store_, p);
    for (;;) {
      const Word r = cell_load(c);
      if (!is_flagged(r, FlagKind::dcss)) return r;
      help(p, r);
    }
  }

  // Completes the DCSS named by fdes, or returns at once if its descriptor
  // has been reused (the operation is then already over).
  void help(ProcessId p, Word fdes) {
    (void)p;
    hook(HookPoint::dcss_help_begin);
    const DescriptorHandle des = unflag(fdes, FlagKind::dcss);
    if (style_ == DcssHelpStyle::field_by_field) {
      help_field_by_field(des, fdes);
      return;
    }
    std::array<Word, 5> v;
    if (!store_.read_immutables(des, v)) return;
    const Operand1 a1 = Operand1::decode(v[0]);
    Cell& a2 = *reinterpret_cast<Cell*>(v[2]);
    cell_cas(a2, fdes, operand1_value(a1) == v[1] ? v[4] : v[3]);
  }

  Store& store() { return store_; }

 private:
  // A k-CAS state read outside that k-CAS's own help; an invalid handle
  // means the k-CAS is over, so any non-Undecided default is equivalent.
  Word operand1_value(Operand1 a1) const {
    if (a1.is_kcas_state()) {
      return kcas_store_->read_field(a1.kcas_handle(), kcas_state_,
                                     status_word(KcasStatus::succeeded));
    }
    return cell_load(a1.cell_ref());
  }

  void help_field_by_field(DescriptorHandle des, Word fdes) {
    const auto a1 = store_.read_field(des, addr1_);
    if (!a1) return;
    const auto a2 = store_.read_field(des, addr2_);
    if (!a2) return;
    const auto e1 = store_.read_field(des, exp1_);
    if (!e1) return;
    Cell& cell2 = *reinterpret_cast<Cell*>(*a2);
    if (operand1_value(Operand1::decode(*a1)) == *e1) {
      const auto n2 = store_.read_field(des, new2_);
      if (!n2) return;
      cell_cas(cell2, fdes, *n2);
    } else {
      const auto e2 = store_.read_field(des, exp2_);
      if (!e2) return;
      cell_cas(cell2, fdes, *e2);
    }
  }

  Store& store_;
  Store* kcas_store_;
  FieldRef kcas_state_;
  DcssHelpStyle style_;
  FieldRef addr1_, exp1_, addr2_, exp2_, new2_;
};

}  // namespace weakdesc
