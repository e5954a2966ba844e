#pragma once

#include <random>

#include <Eigen/Dense>

#include "sogpe/assembly.hpp"
#include "sogpe/spinor.hpp"
#include "sogpe/state.hpp"

namespace fixtures {

using sogpe::Mat;
using sogpe::Vec;

/// Every term switched on, small enough for the A-iteration to contract fast.
inline sogpe::PhysicsParams mild_physics() {
  sogpe::PhysicsParams p;
  p.delta = 0.5;
  p.omega = 1.0;
  p.k0 = 1.0;
  p.beta11 = 3.0;
  p.beta12 = 2.0;
  p.beta22 = 2.5;
  p.potential_shift_enabled = true;
  return p;
}

/// The k0 = 10 benchmark parameters.
inline sogpe::PhysicsParams k0_10_physics() {
  sogpe::PhysicsParams p;
  p.omega = 50.0;
  p.k0 = 10.0;
  p.beta11 = 10.0;
  p.beta12 = 9.0;
  p.beta22 = 9.0;
  p.potential_shift_enabled = true;
  return p;
}

inline sogpe::RectDomain square(int n_sub) {
  sogpe::RectDomain d;
  d.n_sub = n_sub;
  return d;
}

inline sogpe::Discretization make_disc(int n_sub, int order, const sogpe::PhysicsParams& p) {
  return sogpe::Discretization(sogpe::build_space(square(n_sub), order), p);
}

inline Vec random_vec(Eigen::Index n, std::mt19937& gen) {
  std::normal_distribution<double> dist;
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(gen);
  return v;
}

inline sogpe::SpinorField random_field(const sogpe::Discretization& disc, std::mt19937& gen, bool unit = true) {
  sogpe::SpinorField u(disc.space_ptr(), random_vec(4 * disc.dofs(), gen));
  return unit ? sogpe::normalize(disc, u) : u;
}

/// v minus its M-projection onto u (u of unit mass).
inline Vec tangent(const sogpe::Discretization& disc, const sogpe::SpinorField& u, Vec v) {
  const Vec mu = disc.mass_padded() * u.coeffs();
  return v - u.coeffs() * (mu.dot(v) / mu.dot(u.coeffs()));
}

inline Mat dense(const sogpe::SpMat& a) { return Mat(a); }

inline double max_abs(const Mat& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace fixtures
