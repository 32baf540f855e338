#pragma once

#include <stdexcept>
#include <string>

namespace ckrr {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Kernel with g'(0) = 0; rejected at construction.
class DegenerateKernel : public Error {
  using Error::Error;
};

/// Linear solve on a numerically singular system.
class SolveFailure : public Error {
  using Error::Error;
};

/// Covariance matrix with an eigenvalue below the PSD tolerance.
class NotPsd : public Error {
  using Error::Error;
};

/// Fixed-point iteration exhausted its iteration budget.
class NoConvergence : public Error {
  using Error::Error;
};

/// Closed-form Stieltjes branch produced a non-positive value.
class BranchViolation : public Error {
  using Error::Error;
};

/// Spectral argument z too close to (or inside) the empirical support.
class SupportViolation : public Error {
  using Error::Error;
};

/// Risk-limit denominator n - m^2 tr S^2 (I+mS)^-2 is non-positive.
class DenominatorNonPositive : public Error {
  using Error::Error;
};

/// Tuning closed form has a negative radicand; caller should grid-search.
class NegativeRadicand : public Error {
  using Error::Error;
};

/// Tuning closed form produced no positive stationary point.
class NonPositiveM : public Error {
  using Error::Error;
};

/// Target value not bracketed by the search interval.
class OutOfRange : public Error {
  using Error::Error;
};

/// Requested z cannot be realized with a positive regularization.
class Unreachable : public Error {
  using Error::Error;
};

class CsvParseError : public Error {
  using Error::Error;
};

class InsufficientRows : public Error {
  using Error::Error;
};

class ConfigError : public Error {
  using Error::Error;
};

/// Internal numerical invariant failed (e.g. stationarity validation).
class NumericalError : public Error {
  using Error::Error;
};

}  // namespace ckrr
