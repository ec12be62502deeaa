#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qms {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression source; `offset` is the 0-based character position.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Evaluation outside the domain of a function, metric or potential.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Phase-space point on the singular set of the hyperspherical chart.
class ChartError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Invalid parameters handed to a constructor or catalog lookup.
class ParameterError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

}  // namespace qms
