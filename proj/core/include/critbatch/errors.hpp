#pragma once

#include <stdexcept>
#include <string>

namespace critbatch {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A problem constructor was handed parameters that violate its preconditions
/// (nonpositive spectrum entry, zero smoothness constant, dimension mismatch, ...).
struct InvalidProblemError : Error {
  using Error::Error;
};

/// A learning-rate rule breaks the alpha < 2/L cap.
struct ScheduleViolation : Error {
  ScheduleViolation(std::string msg, double alpha, double cap)
      : Error(std::move(msg)), alpha(alpha), cap(cap) {}
  double alpha;
  double cap;  // 2/L
};

/// A batch size (or precision) falls outside the domain of a closed-form
/// expression. `pole` carries the exact boundary so callers can build valid
/// b-grids.
struct TheoryDomainError : Error {
  TheoryDomainError(std::string msg, double pole) : Error(std::move(msg)), pole(pole) {}
  double pole;
};

/// The estimator was asked to invert a regime whose critical batch size does
/// not determine the constant ratio (constant rate, a = 1/2).
struct NotInvertibleError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  IoError(std::string msg, std::string path) : Error(std::move(msg)), path(std::move(path)) {}
  std::string path;
};

}  // namespace critbatch
