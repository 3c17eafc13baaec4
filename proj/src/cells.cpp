#include "weakdesc/cells.hpp"

#include <string>
#include <tuple>

namespace weakdesc {

namespace {
std::atomic<ArrayId> g_next_array_id{1};
}

ArrayId CellRef::array_id() const { return array->id(); }

bool operator<(const CellRef& a, const CellRef& b) {
  return std::tuple(a.array->id(), a.index) < std::tuple(b.array->id(), b.index);
}

CellArray::CellArray(std::size_t size, Word init)
    : CellArray(g_next_array_id.fetch_add(1), size, init) {}

CellArray::CellArray(ArrayId id, std::size_t size, Word init)
    : id_(id), size_(size), cells_(std::make_unique<Cell[]>(size)) {
  fill(init);
}

void CellArray::check(std::size_t idx) const {
  if (idx >= size_) {
    throw RangeError("cell index " + std::to_string(idx) + " out of range [0, " +
                     std::to_string(size_) + ")");
  }
}

Word CellArray::read(std::size_t idx) const {
  check(idx);
  return cell_load(cells_[idx]);
}

Word CellArray::cas(std::size_t idx, Word expected, Word desired) {
  check(idx);
  return cell_cas(cells_[idx], expected, desired);
}

CellRef CellArray::ref(std::size_t idx) const {
  check(idx);
  return CellRef{this, idx};
}

void CellArray::fill(Word value) {
  for (std::size_t i = 0; i < size_; ++i) {
    cells_[i].store(value, std::memory_order_relaxed);
  }
  std::atomic_thread_fence(std::memory_order_seq_cst);
}

}  // namespace weakdesc
