#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace liouville {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GridMismatchError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument or broken type invariant (bad grid, non-finite data, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// exp(Q) would overflow.
class RangeError : public Error {
 public:
  using Error::Error;
};

class ConditionUViolation : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// Eigenvalue bracketing or refinement failed.
class SolverError : public Error {
 public:
  using Error::Error;
};

class DegenerateEigenfunctionError : public Error {
 public:
  using Error::Error;
};

class PoleCollisionError : public Error {
 public:
  using Error::Error;
};

class InversionError : public Error {
 public:
  InversionError(const std::string& what, std::vector<double> history)
      : Error(what), residual_history_(std::move(history)) {}
  const std::vector<double>& residual_history() const { return residual_history_; }

 private:
  std::vector<double> residual_history_;
};

class FitError : public Error {
 public:
  FitError(const std::string& stage, const std::string& what, double final_residual)
      : Error(stage + ": " + what), stage_(stage), final_residual_(final_residual) {}
  /// "target", "fit", "invert" or "verify".
  const std::string& stage() const { return stage_; }
  double final_residual() const { return final_residual_; }

 private:
  std::string stage_;
  double final_residual_;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace liouville
