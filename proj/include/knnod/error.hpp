#pragma once

#include <stdexcept>
#include <string>

namespace knnod {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Out-of-range agent id, k outside [1, n], negative confidence range, ...
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Operation invoked on the wrong numeric backend, or with mixed backends.
class BackendError : public Error {
 public:
  using Error::Error;
};

class AggregationError : public Error {
 public:
  AggregationError() : Error("empty aggregation") {}
};

/// Scenario rejected before execution. `field` names the offending JSON path.
class ScenarioError : public Error {
 public:
  ScenarioError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace knnod
