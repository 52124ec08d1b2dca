#pragma once

#include <stdexcept>
#include <string>

namespace adsv {

/// Base class for all errors raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed, inconsistent, or missing input data: documents, traces,
/// rulesets, cross references. Callers report these as data errors.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Parse failure with a source location (1-based line and column).
class ParseError : public DataError {
 public:
  ParseError(std::string message, int line, int column)
      : DataError(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// A rule references a channel, parameter, or metadata key that the run
/// does not provide.
class EvaluationError : public DataError {
 public:
  using DataError::DataError;
};

/// A test budget that cannot satisfy the per-scenario floor.
class InfeasibleBudget : public Error {
 public:
  using Error::Error;
};

}  // namespace adsv
