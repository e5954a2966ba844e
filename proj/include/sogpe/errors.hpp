#pragma once

#include <stdexcept>
#include <string>

namespace sogpe {

/// Invalid mesh, physics or run configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operands live on different finite-element spaces, or vector sizes disagree.
class SpaceMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical operation produced an unusable result (non-finite values,
/// failed residual checks, eigensolver stagnation, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the direct solvers when a pivot falls below the singularity
/// threshold. `pivot_ratio` is min|U_ii| / max|U_ii| of the scaled factor.
class SingularMatrix : public NumericalError {
 public:
  SingularMatrix(const std::string& what, double pivot_ratio)
      : NumericalError(what), pivot_ratio_(pivot_ratio) {}
  double pivot_ratio() const noexcept { return pivot_ratio_; }

 private:
  double pivot_ratio_;
};

/// The shift of the J-operator coincides (numerically) with a point of its spectrum.
class ShiftOnSpectrum : public NumericalError {
 public:
  ShiftOnSpectrum(const std::string& what, double sigma)
      : NumericalError(what), sigma_(sigma) {}
  double sigma() const noexcept { return sigma_; }

 private:
  double sigma_;
};

/// Run artifacts cannot be written.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sogpe
