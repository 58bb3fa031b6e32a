#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lops {

// Base of every error raised by the library. The CLI maps subclasses onto
// stable exit codes: validation 2, data 3, numeric 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration, violated precondition or inconsistent inputs.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed or unreadable input data.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Non-finite loss or parameters during optimisation.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace lops
