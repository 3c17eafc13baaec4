#pragma once

#include <cstdint>
#include <string>

#include "weakdesc/errors.hpp"

namespace weakdesc {

using Word = std::uint64_t;

// Bit 0 flags a DCSS descriptor handle, bit 1 a k-CAS descriptor handle.
// Application values keep both bits clear.
enum class FlagKind : unsigned { dcss = 1u, kcas = 2u };

inline constexpr Word kTagMask = 0b11;

// Packed descriptor reference. For reusable descriptors the layout is
//   bits 0-1   tag space, always clear
//   bits 2-15  owner process id
//   bits 16-63 sequence number
// Allocating providers use the record address instead; only the low two
// bits are interpreted outside the owning provider.
class DescriptorHandle {
 public:
  static constexpr unsigned kOwnerShift = 2;
  static constexpr unsigned kOwnerBits = 14;
  static constexpr unsigned kSeqShift = 16;
  static constexpr unsigned kSeqBits = 48;
  static constexpr Word kOwnerMask = (Word{1} << kOwnerBits) - 1;
  static constexpr Word kSeqMask = (Word{1} << kSeqBits) - 1;

  constexpr DescriptorHandle() = default;
  constexpr explicit DescriptorHandle(Word bits) : bits_(bits) {}

  static constexpr DescriptorHandle make(std::uint32_t owner, Word seq) {
    return DescriptorHandle((Word(owner) & kOwnerMask) << kOwnerShift |
                            (seq & kSeqMask) << kSeqShift);
  }

  constexpr Word bits() const { return bits_; }
  constexpr std::uint32_t owner() const {
    return static_cast<std::uint32_t>((bits_ >> kOwnerShift) & kOwnerMask);
  }
  constexpr Word seq() const { return bits_ >> kSeqShift; }

  friend constexpr bool operator==(DescriptorHandle, DescriptorHandle) = default;

 private:
  Word bits_ = 0;
};

constexpr bool is_flagged(Word w, FlagKind kind) {
  return (w & static_cast<Word>(kind)) != 0;
}

constexpr bool is_application_value(Word w) { return (w & kTagMask) == 0; }

inline Word flag(DescriptorHandle h, FlagKind kind) {
  if ((h.bits() & kTagMask) != 0) {
    throw EncodingError("descriptor handle has tag bits set: " +
                        std::to_string(h.bits()));
  }
  return h.bits() | static_cast<Word>(kind);
}

// Clearing the kind's bit; a word without that bit comes back unchanged.
constexpr DescriptorHandle unflag(Word w, FlagKind kind) {
  return DescriptorHandle(w & ~static_cast<Word>(kind));
}

}  // namespace weakdesc
