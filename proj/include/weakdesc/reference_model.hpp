#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "weakdesc/word.hpp"

namespace weakdesc::reference {

// Brute-force sequential semantics of DCSS and k-CAS over a plain vector.
// Shares no code with the concurrent implementations.
class SequentialMemory {
 public:
  struct Entry {
    std::size_t index;
    Word expected;
    Word desired;
  };

  explicit SequentialMemory(std::size_t size, Word init = 0) : cells_(size, init) {}

  Word read(std::size_t i) const { return cells_.at(i); }

  // Operand 1 is another cell of the same memory.
  Word dcss(std::size_t i1, Word e1, std::size_t i2, Word e2, Word n2) {
    const Word current = cells_.at(i2);
    if (current == e2 && cells_.at(i1) == e1) cells_[i2] = n2;
    return current;
  }

  bool kcas(std::span<const Entry> entries) {
    for (const Entry& e : entries) {
      if (cells_.at(e.index) != e.expected) return false;
    }
    for (const Entry& e : entries) cells_[e.index] = e.desired;
    return true;
  }

  const std::vector<Word>& cells() const { return cells_; }

 private:
  std::vector<Word> cells_;
};

}  // namespace weakdesc::reference
