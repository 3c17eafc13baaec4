#pragma once

#include <stdexcept>
#include <string>

namespace weakdesc {

// Base for every error thrown by the library. Value-level outcomes of
// dcss/kcas (a failed compare) are return values, never exceptions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Cell index outside [0, size).
class RangeError : public Error {
 public:
  using Error::Error;
};

// A word that should have clear tag bits does not.
class EncodingError : public Error {
 public:
  using Error::Error;
};

// Field name, value list, or field width does not match the descriptor type.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Caller broke an API precondition (foreign process id, duplicate k-CAS
// cells, unbalanced epoch brackets, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace weakdesc
