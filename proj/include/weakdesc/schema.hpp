#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "weakdesc/word.hpp"

namespace weakdesc {

// Resolved field of a descriptor type. Immutable fields are whole words;
// mutable fields are bit ranges of the low 14 bits of the mutables word.
struct FieldRef {
  enum class Kind : std::uint8_t { immutable, mutable_bits };

  Kind kind = Kind::immutable;
  std::uint16_t index = 0;  // immutable word index or mutable field ordinal
  std::uint8_t shift = 0;
  std::uint8_t width = 0;

  bool is_mutable() const { return kind == Kind::mutable_bits; }
  Word mask() const { return ((Word{1} << width) - 1) << shift; }
  Word extract(Word mutables) const { return (mutables & mask()) >> shift; }
  Word insert(Word mutables, Word value) const {
    return (mutables & ~mask()) | ((value << shift) & mask());
  }
};

struct FieldSpec {
  std::string name;
  bool is_mutable = false;
  unsigned bits = 64;  // only meaningful for mutable fields
};

// Field layout of one descriptor type.
class DescriptorSchema {
 public:
  // Budget for all mutable fields of one type; the rest of the mutables
  // word holds the sequence number.
  static constexpr unsigned kMutableBitBudget = 14;

  DescriptorSchema() = default;
  DescriptorSchema(std::string type_name, std::vector<FieldSpec> fields);

  const std::string& type_name() const { return type_name_; }
  std::size_t immutable_count() const { return immutable_names_.size(); }
  std::size_t mutable_count() const { return mutable_fields_.size(); }

  // Throws SchemaError for unknown names.
  FieldRef field(std::string_view name) const;
  FieldRef mutable_field(std::size_t ordinal) const { return mutable_fields_[ordinal]; }

  // Validates an initial mutable value list and packs it into the low bits
  // of a mutables word.
  Word pack_mutables(std::span<const Word> values) const;
  void check_immutables(std::span<const Word> values) const;
  void check_mutable_value(FieldRef f, Word value) const;

  friend bool operator==(const DescriptorSchema&, const DescriptorSchema&) = default;

 private:
  std::string type_name_;
  std::vector<std::string> immutable_names_;
  std::vector<std::string> mutable_names_;
  std::vector<FieldRef> mutable_fields_;
};

}  // namespace weakdesc
