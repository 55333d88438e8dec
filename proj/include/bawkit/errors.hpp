#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace bawkit {

// Malformed input text. line is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that violates a domain invariant.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Failure of a physics evaluation at a specific frequency.
class PhysicsError : public std::runtime_error {
 public:
  PhysicsError(const std::string& what, double frequency_hz)
      : std::runtime_error(what + " (f = " + format_hz(frequency_hz) + " Hz)"),
        frequency_hz_(frequency_hz) {}

  double frequency_hz() const noexcept { return frequency_hz_; }

 private:
  static std::string format_hz(double f) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", f);
    return buf;
  }

  double frequency_hz_;
};

// The linear system of the stack is singular (only reachable with lossless media).
class SingularSystemError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

// Mode search could not produce a result for the requested band.
class ModeSearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Too many sweep cells failed mode detection for the result to be useful.
class SweepCoverageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bawkit
