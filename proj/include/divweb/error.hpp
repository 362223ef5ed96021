#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace divweb {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text.
class ParseError : public Error {
 public:
  ParseError(std::size_t position, std::vector<std::string> expected, const std::string& message);

  std::size_t position() const noexcept { return position_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::vector<std::string> expected_;
};

/// Evaluation left the domain of an elementary function (log of a
/// non-positive number, division by zero, ...).
class DomainError : public Error {
 public:
  DomainError(std::string subexpression, const std::string& message)
      : Error(message), subexpression_(std::move(subexpression)) {}

  const std::string& subexpression() const noexcept { return subexpression_; }

 private:
  std::string subexpression_;
};

/// Quadrature or root solver did not reach its tolerance, or a numeric
/// procedure produced an inconsistent intermediate value.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Input violates an operation's precondition (bad block partition,
/// non-trivial web passed to the trivializing map, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace divweb
