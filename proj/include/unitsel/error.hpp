#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>

namespace unitsel {

// Exception hierarchy. The CLI maps each family onto an exit code.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or semantically invalid input (files, evidence, objective terms).
class InputError : public Error {
 public:
  using Error::Error;
};

/// An engine could not finish: scope cap, enumeration budget, timeout, ...
class EngineError : public Error {
 public:
  using Error::Error;
};

class ScopeCapError : public EngineError {
 public:
  ScopeCapError(std::size_t scope_size, double entries)
      : EngineError("factor scope of " + std::to_string(scope_size) +
                    " variables (" + std::to_string(entries) +
                    " entries) exceeds the dense table cap"),
        scope_size_(scope_size) {}

  std::size_t scope_size() const { return scope_size_; }

 private:
  std::size_t scope_size_;
};

class BudgetError : public EngineError {
 public:
  using EngineError::EngineError;
};

class TimeoutError : public EngineError {
 public:
  TimeoutError() : EngineError("time limit exceeded") {}
};

/// Division of a nonzero numerator by a zero denominator.
class SupportError : public EngineError {
 public:
  using EngineError::EngineError;
};

/// Every unit instantiation has Pr(u, e2) = 0.
class InconsistentEvidenceError : public EngineError {
 public:
  InconsistentEvidenceError() : EngineError("e2 inconsistent: Pr(u, e2) = 0 for every u") {}
};

/// Optional wall-clock limit checked cooperatively inside long loops.
class Deadline {
 public:
  using Clock = std::chrono::steady_clock;

  Deadline() = default;
  explicit Deadline(std::chrono::duration<double> budget)
      : end_(Clock::now() + std::chrono::duration_cast<Clock::duration>(budget)) {}

  static Deadline none() { return {}; }

  bool expired() const { return end_ && Clock::now() >= *end_; }

  void check() const {
    if (expired()) throw TimeoutError();
  }

 private:
  std::optional<Clock::time_point> end_;
};

}  // namespace unitsel
