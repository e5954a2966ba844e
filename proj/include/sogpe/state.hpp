#pragma once

#include <array>
#include <optional>
#include <string>

#include "sogpe/assembly.hpp"

namespace sogpe {

/// Tolerance on |mass - 1| accepted by functionals that require u on the manifold.
inline constexpr double kMassTolerance = 1e-10;

struct Eigenpair {
  SpinorField u;
  double lambda = 0.0;
};

/// One iteration of any method. Method tags are "A1", "A2", "J1", "J2"
/// (method letter, element order).
struct IterationRecord {
  int iter = 0;
  std::string method;
  double energy = 0.0;
  double lambda = 0.0;
  double residual = 0.0;
  std::optional<double> sigma;
  std::optional<double> tau;
  double wall_ms = 0.0;
};

/// Nodal interpolation of the standard initial spinor, normalized to unit mass.
SpinorField initial_state(const Discretization& disc);

/// u^T M u.
double mass(const Discretization& disc, const SpinorField& u);
/// u / |u|; throws NumericalError for the zero state.
SpinorField normalize(const Discretization& disc, const SpinorField& u);

double energy(const Discretization& disc, const SpinorField& u);

/// u^T A(u) u; throws NumericalError unless |mass(u) - 1| <= kMassTolerance.
double rayleigh_lambda(const Discretization& disc, const SpinorField& u);

/// sqrt(r^T M^{-1} r) with r = A(u) u - lambda M u.
double residual_norm(const Discretization& disc, const SpinorField& u, double lambda);

/// Energy, Rayleigh quotient and residual from a single assembly of A(u).
struct StateSummary {
  double energy = 0.0;
  double lambda = 0.0;
  double residual = 0.0;
};
StateSummary summarize(const Discretization& disc, const SpinorField& u);
/// Same, reusing an already assembled A(u).
StateSummary summarize(const Discretization& disc, const SpinorField& u, const SpMat& a);

/// min over omega of |e^{i omega} u - v| in the H1 norm.
double quotient_distance(const Discretization& disc, const SpinorField& u, const SpinorField& v);
/// e^{i omega*} u for the minimizing omega*.
SpinorField align_phase(const Discretization& disc, const SpinorField& u, const SpinorField& target);
/// Plain H1 distance |u - v|.
double h1_distance(const Discretization& disc, const SpinorField& u, const SpinorField& v);

/// |u1|^2 and |u2|^2 at every node (boundary nodes included, value 0).
std::array<Vec, 2> density(const SpinorField& u);

/// L2 norm of the difference of the density pairs of u and v.
double density_distance(const Discretization& disc, const SpinorField& u, const SpinorField& v);

}  // namespace sogpe
