#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fsma {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes disagree (dimension, block length or matrix size).
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A precondition on a numeric argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A symbol that is not part of the automaton's input alphabet.
class UnknownSymbol : public Error {
 public:
  using Error::Error;
};

/// Text input could not be parsed. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error("line " + std::to_string(line) + ", col " + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A simulation reached a non-finite or otherwise invalid state.
class SimulationError : public Error {
 public:
  using Error::Error;
};

/// A file could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// An experiment configuration failed validation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace fsma
