#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace slicelab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Collects every violated invariant of a scenario, not just the first one.
class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(std::vector<std::string> violations);

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class DegenerateDelta : public Error {
 public:
  using Error::Error;
};

class OracleFailure : public Error {
 public:
  using Error::Error;
};

class SimulationError : public Error {
 public:
  using Error::Error;
};

// Scenario file problems. `key` is the dotted path of the offending entry.
class ParseError : public Error {
 public:
  ParseError(std::string key, const std::string& what);

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace slicelab
