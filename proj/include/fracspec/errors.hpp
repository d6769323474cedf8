#pragma once

#include <stdexcept>

namespace fracspec {

/// Malformed input: grid/function shape mismatch, bad config value.
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation
/// (non-SPD matrix, fractional order out of range, degenerate coefficient).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A documented precondition does not hold (λ outside the sector, ϰ > 1, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The discrete problem could not be solved (singular symbol, residual rejected).
class SolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fracspec
