#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lichflow {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A field that must be strictly positive was not.
class PositivityError : public Error {
 public:
  PositivityError(const std::string& what, std::size_t index, double value)
      : Error(what), index_(index), value_(value) {}

  /// Flat grid index of the offending minimum.
  std::size_t index() const noexcept { return index_; }
  double value() const noexcept { return value_; }

 private:
  std::size_t index_;
  double value_;
};

/// Coefficient-expression syntax error.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset, std::vector<std::string> expected)
      : Error(what), offset_(offset), expected_(std::move(expected)) {}

  /// Byte offset into the parsed text.
  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

}  // namespace lichflow
