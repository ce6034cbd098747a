#pragma once

#include <stdexcept>
#include <string>

namespace minleaf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unusable input data (CSV content, dataset shape, split sizes).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Text formats: LP files, solution files, JSON models.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  explicit ParseError(const std::string& what) : Error(what) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

/// A request that contradicts a model invariant, e.g. a tree violating N_min.
class ModelError : public Error {
 public:
  using Error::Error;
};

}  // namespace minleaf
