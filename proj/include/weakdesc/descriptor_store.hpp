#pragma once

#include <concepts>
#include <optional>
#include <span>

#include "weakdesc/process.hpp"
#include "weakdesc/schema.hpp"
#include "weakdesc/word.hpp"

namespace weakdesc {

// What dcss/kcas need from a descriptor provider: the extended weak
// descriptor ADT plus lifecycle hooks. DescriptorTable (reuse) and
// AllocatingTable (wasteful) both model it; for the latter the invalid
// results never occur.
template <class S>
concept DescriptorStore = requires(S& s, const S& cs, ProcessId p, DescriptorHandle h,
                                   FieldRef f, Word w, std::span<const Word> in,
                                   std::span<Word> out) {
  { s.create_new(p, in, in) } -> std::same_as<DescriptorHandle>;
  { cs.read_field(h, f, w) } -> std::same_as<Word>;
  { cs.read_field(h, f) } -> std::same_as<std::optional<Word>>;
  { cs.read_immutables(h, out) } -> std::same_as<bool>;
  { s.write_field(h, f, w) };
  { s.cas_field(h, f, w, w) } -> std::same_as<std::optional<Word>>;
  { s.begin_op(p) };
  { s.end_op(p) };
  { s.release(p, h) };
  { cs.schema() } -> std::convertible_to<const DescriptorSchema&>;
};

// RAII bracket around one public operation.
template <DescriptorStore Store>
class OpScope {
 public:
  OpScope(Store& store, ProcessId p) : store_(store), p_(p) { store_.begin_op(p_); }
  ~OpScope() { store_.end_op(p_); }
  OpScope(const OpScope&) = delete;
  OpScope& operator=(const OpScope&) = delete;

 private:
  Store& store_;
  ProcessId p_;
};

}  // namespace weakdesc
