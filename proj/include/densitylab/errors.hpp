#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace densitylab {

/// Base class for all densitylab errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A counting/summation fallback would have to scan more elements than the
/// configured cap allows.
class EnumerationCapExceeded : public Error {
 public:
  EnumerationCapExceeded(std::int64_t requested, std::int64_t cap)
      : Error("enumeration cap exceeded: would scan " +
              std::to_string(requested) + " elements, cap is " +
              std::to_string(cap)),
        requested(requested),
        cap(cap) {}

  std::int64_t requested;
  std::int64_t cap;
};

/// A sequence value fell outside the domain an operation requires
/// (e.g. the rounding transform needs values in [0,1]).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Parts of a certified disjoint union were found to overlap.
class DisjointnessViolation : public Error {
 public:
  using Error::Error;
};

/// Malformed expression text. Carries the position of the offending token.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, int line, int column, std::string token)
      : Error("syntax error at " + std::to_string(line) + ":" +
              std::to_string(column) + ": " + what +
              (token.empty() ? "" : " (got '" + token + "')")),
        line(line),
        column(column),
        token(std::move(token)) {}

  int line;
  int column;
  std::string token;
};

/// Well-formed expression with invalid content (residue >= modulus,
/// overlapping blocks, non-disjoint union, ...).
class SemanticError : public Error {
 public:
  explicit SemanticError(const std::string& what, int line = 0, int column = 0)
      : Error((line > 0 ? "semantic error at " + std::to_string(line) + ":" +
                              std::to_string(column) + ": " + what
                        : "semantic error: " + what)),
        line(line),
        column(column) {}

  int line;
  int column;
};

}  // namespace densitylab
