#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace phasemon {

// A numeric precondition failed (e.g. a non-positive reference throughput).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The caller broke an API contract (out-of-order samples, empty history, ...).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A value violates a documented invariant. `row` is set when the value came
// from a file.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
  ValidationError(std::uint64_t row, const std::string& what)
      : std::runtime_error("row " + std::to_string(row) + ": " + what), row_(row), has_row_(true) {}

  bool has_row() const noexcept { return has_row_; }
  std::uint64_t row() const noexcept { return row_; }

 private:
  std::uint64_t row_ = 0;
  bool has_row_ = false;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::uint64_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::uint64_t line() const noexcept { return line_; }

 private:
  std::uint64_t line_;
};

class SchedulingConflict : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Internal consistency check failed; maps to CLI exit code 3.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace phasemon
