#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace submarket {

/// Bad or inconsistent input data (maps to CLI exit status 2).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DuplicateEdgeError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Numerical failure inside an algorithm (maps to CLI exit status 3).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateFitError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace submarket
