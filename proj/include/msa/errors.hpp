#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace msa {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed model document (bad JSON, unknown keys, wrong types).
/// `byte` is the offset into the input where the problem was detected,
/// or 0 when the error is structural rather than lexical.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t byte = 0)
      : Error(what), byte_(byte) {}
  std::size_t byte() const { return byte_; }

private:
  std::size_t byte_;
};

/// Structurally well-formed model that violates a validation rule
/// (dangling node reference, negative stiffness, zero-length element, ...).
class ModelError : public Error {
public:
  using Error::Error;
};

/// Numerical failure: factorization breakdown or eigensolver
/// non-convergence within the iteration cap.
class SolverError : public Error {
public:
  using Error::Error;
};

} // namespace msa
