#pragma once

#include <stdexcept>
#include <string>

namespace gridbarrier {

// Base for every error raised by the library. Callers that only need to
// distinguish "bad input" from "numerical failure" can use is_validation().
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual bool is_validation() const { return false; }
};

class ValidationFailure : public Error {
 public:
  using Error::Error;
  bool is_validation() const override { return true; }
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NotATree : public ValidationFailure {
 public:
  using ValidationFailure::ValidationFailure;
};

class NonPositiveImpedance : public ValidationFailure {
 public:
  using ValidationFailure::ValidationFailure;
};

class SingularKKT : public Error {
 public:
  using Error::Error;
};

class DegenerateConstraint : public Error {
 public:
  using Error::Error;
};

// Algorithm activation requires at least one bus at or above its limit.
class NotActivated : public Error {
 public:
  using Error::Error;
};

class Infeasible : public Error {
 public:
  using Error::Error;
};

class MaxPivots : public Error {
 public:
  using Error::Error;
};

class ParseError : public ValidationFailure {
 public:
  using ValidationFailure::ValidationFailure;
};

class ValidationError : public ValidationFailure {
 public:
  using ValidationFailure::ValidationFailure;
};

// An input file that does not exist or cannot be opened.
class MissingFile : public ValidationFailure {
 public:
  using ValidationFailure::ValidationFailure;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gridbarrier
