#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>

#include "weakdesc/hooks.hpp"
#include "weakdesc/word.hpp"

namespace weakdesc {

using ArrayId = std::uint32_t;
using Cell = std::atomic<Word>;

class CellArray;

// A validated (array, index) pair. Ordering is by (array_id, index), the
// global lock order used by k-CAS.
struct CellRef {
  const CellArray* array = nullptr;
  std::size_t index = 0;

  Cell& cell() const;
  ArrayId array_id() const;

  friend bool operator==(const CellRef& a, const CellRef& b) {
    return a.array == b.array && a.index == b.index;
  }
  friend bool operator<(const CellRef& a, const CellRef& b);
};

// Fixed-size region of word-sized atomic cells. Not copyable or movable:
// descriptors hold raw cell addresses.
class CellArray {
 public:
  explicit CellArray(std::size_t size, Word init = 0);
  CellArray(ArrayId id, std::size_t size, Word init = 0);

  CellArray(const CellArray&) = delete;
  CellArray& operator=(const CellArray&) = delete;

  ArrayId id() const { return id_; }
  std::size_t size() const { return size_; }

  // Range-checked accessors.
  Word read(std::size_t idx) const;
  Word cas(std::size_t idx, Word expected, Word desired);
  CellRef ref(std::size_t idx) const;

  // Unchecked; idx must be in range.
  Cell& cell(std::size_t idx) const { return cells_[idx]; }

  // Quiescent-only helpers.
  void fill(Word value);

 private:
  void check(std::size_t idx) const;

  ArrayId id_;
  std::size_t size_;
  std::unique_ptr<Cell[]> cells_;
};

inline Cell& CellRef::cell() const { return array->cell(index); }

// Single-word primitives every algorithm goes through.
inline Word cell_load(const Cell& c) {
  hook(HookPoint::cell_read);
  return c.load(std::memory_order_seq_cst);
}

// Returns the value witnessed before the operation; success iff it equals
// `expected`.
inline Word cell_cas(Cell& c, Word expected, Word desired) {
  hook(HookPoint::cell_cas);
  c.compare_exchange_strong(expected, desired, std::memory_order_seq_cst);
  return expected;
}

}  // namespace weakdesc
