#include "weakdesc/schema.hpp"

#include <algorithm>

#include "weakdesc/errors.hpp"

namespace weakdesc {

DescriptorSchema::DescriptorSchema(std::string type_name, std::vector<FieldSpec> fields)
    : type_name_(std::move(type_name)) {
  unsigned used_bits = 0;
  for (auto& f : fields) {
    const bool taken =
        std::find(immutable_names_.begin(), immutable_names_.end(), f.name) !=
            immutable_names_.end() ||
        std::find(mutable_names_.begin(), mutable_names_.end(), f.name) !=
            mutable_names_.end();
    if (taken) throw SchemaError("duplicate field '" + f.name + "' in " + type_name_);

    if (!f.is_mutable) {
      immutable_names_.push_back(std::move(f.name));
      continue;
    }
    if (f.bits == 0 || used_bits + f.bits > kMutableBitBudget) {
      throw SchemaError("mutable fields of " + type_name_ + " exceed " +
                        std::to_string(kMutableBitBudget) + " bits");
    }
    FieldRef ref;
    ref.kind = FieldRef::Kind::mutable_bits;
    ref.index = static_cast<std::uint16_t>(mutable_fields_.size());
    ref.shift = static_cast<std::uint8_t>(used_bits);
    ref.width = static_cast<std::uint8_t>(f.bits);
    used_bits += f.bits;
    mutable_fields_.push_back(ref);
    mutable_names_.push_back(std::move(f.name));
  }
}

FieldRef DescriptorSchema::field(std::string_view name) const {
  for (std::size_t i = 0; i < immutable_names_.size(); ++i) {
    if (immutable_names_[i] == name) {
      FieldRef ref;
      ref.kind = FieldRef::Kind::immutable;
      ref.index = static_cast<std::uint16_t>(i);
      return ref;
    }
  }
  for (std::size_t i = 0; i < mutable_names_.size(); ++i) {
    if (mutable_names_[i] == name) return mutable_fields_[i];
  }
  throw SchemaError("unknown field '" + std::string(name) + "' in " + type_name_);
}

Word DescriptorSchema::pack_mutables(std::span<const Word> values) const {
  if (values.size() != mutable_fields_.size()) {
    throw SchemaError(type_name_ + " expects " + std::to_string(mutable_fields_.size()) +
                      " mutable values, got " + std::to_string(values.size()));
  }
  Word packed = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    check_mutable_value(mutable_fields_[i], values[i]);
    packed = mutable_fields_[i].insert(packed, values[i]);
  }
  return packed;
}

void DescriptorSchema::check_immutables(std::span<const Word> values) const {
  if (values.size() != immutable_names_.size()) {
    throw SchemaError(type_name_ + " expects " + std::to_string(immutable_names_.size()) +
                      " immutable values, got " + std::to_string(values.size()));
  }
}

void DescriptorSchema::check_mutable_value(FieldRef f, Word value) const {
  if (!f.is_mutable()) throw SchemaError("field is immutable in " + type_name_);
  if (f.width < 64 && (value >> f.width) != 0) {
    throw SchemaError("value " + std::to_string(value) + " exceeds " +
                      std::to_string(f.width) + "-bit field in " + type_name_);
  }
}

}  // namespace weakdesc
