#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace warpfda {

/// Broad failure classes. The CLI maps these onto exit codes
/// (validation -> 1, numerical -> 2).
enum class ErrorCategory { validation, numerical };

class Error : public std::runtime_error {
public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

private:
  ErrorCategory category_;
};

class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorCategory::validation, what) {}
};

class NumericalError : public Error {
public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorCategory::numerical, what) {}
};

/// Two functions were combined although they live on different grids.
class GridMismatchError : public ValidationError {
public:
  GridMismatchError() : ValidationError("grid mismatch: functions are sampled on different grids") {}
};

class ParameterError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

/// Base for warping-function violations; carries the offending grid indices.
class WarpingError : public ValidationError {
public:
  WarpingError(const std::string& what, std::vector<std::size_t> indices)
      : ValidationError(what), indices_(std::move(indices)) {}

  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

private:
  std::vector<std::size_t> indices_;
};

class EndpointError : public WarpingError {
public:
  using WarpingError::WarpingError;
};

class MonotonicityError : public WarpingError {
public:
  using WarpingError::WarpingError;
};

class InsufficientDataError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class TruncationError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class HazardOverflowError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class QuantileInversionError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class DegenerateError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class OptimizationError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Malformed input file. Row and column are 1-based; 0 means "not applicable".
class ParseError : public ValidationError {
public:
  ParseError(const std::string& what, std::size_t row = 0, std::size_t column = 0)
      : ValidationError(what), row_(row), column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t row_;
  std::size_t column_;
};

// Non-fatal conditions. Operations that can emit them take an optional sink.

enum class WarningKind { degenerate_tangent, density_floored };

struct Warning {
  WarningKind kind;
  std::string message;
};

using WarningLog = std::vector<Warning>;

inline void emit(WarningLog* log, WarningKind kind, std::string message) {
  if (log != nullptr) {
    log->push_back(Warning{kind, std::move(message)});
  }
}

}  // namespace warpfda
