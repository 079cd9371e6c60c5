#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ecglite {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad caller input: wrong window sizes, empty label sets, etc.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Malformed on-disk data. `line()` is 1-based when known, 0 otherwise.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class UnsupportedFormatError : public ParseError {
 public:
  explicit UnsupportedFormatError(int code, std::size_t line = 0)
      : ParseError("unsupported format " + std::to_string(code), line), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss or similar divergence during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ecglite
