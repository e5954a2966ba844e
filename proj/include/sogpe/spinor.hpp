#pragma once

#include <complex>

#include "sogpe/mesh.hpp"

namespace sogpe {

/// Block order of the real 4N formulation.
enum Part : int { kU1R = 0, kU1I = 1, kU2R = 2, kU2I = 3 };

/// Discrete two-component state: interior coefficients in block order
/// [u1 real, u1 imag, u2 real, u2 imag], each of length N.
class SpinorField {
 public:
  SpinorField() = default;
  SpinorField(SpacePtr space, Vec coeffs);

  static SpinorField zero(SpacePtr space);

  const FeSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  int dofs() const { return space_->dofs(); }

  const Vec& coeffs() const { return coeffs_; }
  Vec& coeffs() { return coeffs_; }

  auto part(int p) const { return coeffs_.segment(static_cast<Eigen::Index>(p) * dofs(), dofs()); }
  auto part(int p) { return coeffs_.segment(static_cast<Eigen::Index>(p) * dofs(), dofs()); }

  /// Multiplication by the complex scalar c (applied to both components).
  SpinorField scaled(std::complex<double> c) const;
  /// e^{i omega} u.
  SpinorField rotated(double omega) const { return scaled(std::polar(1.0, omega)); }
  /// i u.
  SpinorField times_i() const { return scaled({0.0, 1.0}); }

  bool same_space(const SpinorField& other) const;

 private:
  SpacePtr space_;
  Vec coeffs_;
};

/// Complex multiplication of a raw 4N coefficient vector.
Vec complex_scale(const Vec& coeffs, std::complex<double> c);

}  // namespace sogpe
