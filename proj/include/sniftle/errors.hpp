#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sniftle {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite or otherwise malformed numeric input.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

/// Cholesky (or similar) factorization failed; carries the failing pivot.
class DecompositionError : public Error {
 public:
  DecompositionError(const std::string& what, std::size_t pivot_index)
      : Error(what), pivot_index_(pivot_index) {}
  std::size_t pivot_index() const { return pivot_index_; }

 private:
  std::size_t pivot_index_;
};

/// Singular or ill-conditioned matrix; carries the condition estimate.
class SingularError : public Error {
 public:
  SingularError(const std::string& what, double condition_estimate)
      : Error(what), condition_(condition_estimate) {}
  double condition_estimate() const { return condition_; }

 private:
  double condition_;
};

/// Iterative numeric procedure failed to converge, or roundoff exceeded
/// the clamping band.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Evaluation requested outside the declared spatial/temporal domain.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, double time)
      : Error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_ = 0.0;
};

/// Jacobian/inverse consistency defect exceeded its threshold.
class ConditioningError : public Error {
 public:
  using Error::Error;
};

/// Measure undefined for the given arguments (e.g. t = 0 in an FTLE).
class UndefinedMeasureError : public Error {
 public:
  using Error::Error;
};

/// Degenerate ensemble or other statistical-estimation failure.
class EstimationError : public Error {
 public:
  using Error::Error;
};

/// Config file parse or validation failure; carries a location string.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::string where = "")
      : Error(where.empty() ? what : where + ": " + what),
        where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

/// Checkpoint/spec mismatch when resuming a scan.
class ResumeError : public Error {
 public:
  using Error::Error;
};

}  // namespace sniftle
