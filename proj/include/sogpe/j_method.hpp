#pragma once

#include <memory>
#include <optional>

#include "sogpe/iteration.hpp"
#include "sogpe/linsolve.hpp"

namespace sogpe {

struct ShiftPolicy {
  enum class Mode { Fixed, Adaptive };

  Mode mode = Mode::Adaptive;
  /// Shift for Mode::Fixed.
  double sigma = 0.0;
  /// Adaptive mode: the shift follows the Rayleigh quotient for this many
  /// iterations and is then kept; nullopt never freezes it.
  std::optional<int> freeze_after = 2;

  void validate() const;
};

/// Intermediate results of (C + U V)^{-1} b by the Woodbury formula:
/// z1 = C^{-1} b, Z = C^{-1} U, z2 = (I + V Z)^{-1} V z1, y = z1 - Z z2.
struct WoodburySolve {
  Vec z1;
  Mat Z;
  Eigen::Vector2d z2 = Eigen::Vector2d::Zero();
  Vec y;
  /// |(C + U V) y - b| / |b| (Euclidean).
  double relative_residual = 0.0;
};

/// J(u) - sigma M in factorized form: one LU of C, reused for every solve.
/// Construction throws ShiftOnSpectrum when sigma is (numerically) an
/// eigenvalue, i.e. when C or the 2 x 2 capacitance matrix is singular.
class ShiftedJOperator {
 public:
  static constexpr double kWoodburyTolerance = 1e-9;

  ShiftedJOperator(const Discretization& disc, const SpinorField& u, double sigma);
  ~ShiftedJOperator();
  ShiftedJOperator(ShiftedJOperator&&) noexcept;
  ShiftedJOperator& operator=(ShiftedJOperator&&) noexcept;

  /// Reassembles for a new state and shift, keeping the symbolic analysis.
  void update(const SpinorField& u, double sigma);

  double sigma() const { return sigma_; }
  const JParts& parts() const { return parts_; }

  /// (J(u) - sigma M)^{-1} b. Throws NumericalError when the backward error
  /// |(C + U V) y - b| <= kWoodburyTolerance (|b| + |C| |y| + |U| |V y|)
  /// (infinity norms) is violated.
  WoodburySolve solve(const Vec& b) const;
  /// (J(u) - sigma M) x.
  Vec apply(const Vec& x) const;

 private:
  void rebuild();

  const Discretization* disc_;
  SpinorField u_;
  double sigma_ = 0.0;
  JParts parts_;
  std::unique_ptr<Factorization> lu_;
  Mat z_;                    // C^{-1} U
  Eigen::Matrix2d capacitance_;  // I + V Z
  double c_norm_ = 0.0;
  double u_norm_ = 0.0;
};

struct JStepResult {
  SpinorField u;
  WoodburySolve solve;
};

/// y = (J(u) - sigma M)^{-1} M u, sign-aligned with u in the M inner product,
/// then normalized.
JStepResult j_step(const Discretization& disc, const SpinorField& u, double sigma);
/// Same with a caller-owned operator (already updated to u and sigma).
JStepResult j_step(const Discretization& disc, const SpinorField& u, const ShiftedJOperator& op);

/// Complex L2 product (f, g) = int f1 conj(g1) + f2 conj(g2).
std::complex<double> complex_l2(const Discretization& disc, const SpinorField& f, const SpinorField& g);

/// The J-step with its global phase pinned to u_ref: Theta * normalize(y),
/// Theta = c / |c| with c = (u_ref, y), Theta = 1 when c = 0.
SpinorField j_step_phase_locked(const Discretization& disc, const SpinorField& u_ref, const SpinorField& u,
                                double sigma);

/// Shifted J-iteration. Adaptive shifts are the Rayleigh quotient of the
/// current iterate. A shift on the spectrum is retried once with
/// sigma (1 + 1e-8); three consecutive energy increases above 1e-6 abort.
MethodResult run_j_method(const Discretization& disc, const SpinorField& u0, const ShiftPolicy& policy,
                          const StoppingRule& stop, const IterationObserver& observer = {});

}  // namespace sogpe
