#pragma once

#include <stdexcept>
#include <string>

namespace graphsmile {

/// Base class for every error raised by the library. The CLI maps the
/// concrete subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Data errors (CLI exit 3).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class VocabularyError : public Error {
 public:
  using Error::Error;
};

class LabelingError : public Error {
 public:
  using Error::Error;
};

// Configuration errors (CLI exit 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

// Programming / numeric errors.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class ContractError : public Error {
 public:
  using Error::Error;
};

/// Raised when a loss becomes non-finite during training (CLI exit 4).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace graphsmile
