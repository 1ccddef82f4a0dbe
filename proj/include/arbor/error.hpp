#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace arbor {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands live on trees of different arity, or truncations of different level.
class ArityMismatch : public Error {
 public:
  using Error::Error;
};

/// A configured state/enumeration budget was exhausted. Never a wrong answer.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionFailed : public Error {
 public:
  using Error::Error;
};

/// A name does not resolve (catalog entry, generator, element).
class UnknownName : public Error {
 public:
  using Error::Error;
};

/// A 2-adic scalar does not carry enough bits for the requested depth.
class PrecisionExhausted : public Error {
 public:
  using Error::Error;
};

/// Syntax or resolution error in DSL text, with a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace arbor
