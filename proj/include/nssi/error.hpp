#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nssi {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data violates a documented contract (bad file, bad arguments).
class DataError : public Error {
 public:
  using Error::Error;
};

// A malformed record in a line-oriented file.
class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& detail, const std::string& source = {})
      : DataError((source.empty() ? std::string() : source + ": ") + "line " +
                  std::to_string(line) + ": " + detail),
        line_(line),
        detail_(detail) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

// Numerical failure inside an optimizer or sampler.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace nssi
