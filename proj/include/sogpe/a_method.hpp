#pragma once

#include <memory>
#include <optional>

#include "sogpe/iteration.hpp"
#include "sogpe/linsolve.hpp"

namespace sogpe {

struct AStepConfig {
  enum class TauStrategy { Fixed, LineSearch };

  TauStrategy strategy = TauStrategy::LineSearch;
  /// Step size for TauStrategy::Fixed.
  double tau = 1.0;
  /// Line-search interval [tau_min, tau_max], inside (0, 2).
  double tau_min = 0.01;
  double tau_max = 1.99;
  /// Energy evaluations per line search, the warm-start probe included.
  int line_search_evals = 20;

  void validate() const;
};

/// Factorizes A(u) for successive states, keeping the symbolic analysis.
/// A(u) is symmetric positive definite for admissible parameters; LU is used
/// when the Cholesky factorization fails.
class AOperatorSolver {
 public:
  explicit AOperatorSolver(const Discretization& disc);
  ~AOperatorSolver();

  /// A(u)^{-1} rhs using the given assembled A(u).
  Vec solve(const SpMat& a, const Vec& rhs);
  Vec solve(const SpinorField& u, const Vec& rhs);

 private:
  const Discretization* disc_;
  std::unique_ptr<Factorization> chol_;
  std::unique_ptr<Factorization> lu_;
};

struct ADirection {
  Vec z;         // A(u)^{-1} M u
  double gamma;  // 1 / (z^T M u)
  Vec d;         // gamma z - u, M-orthogonal to u
};

/// Throws NumericalError when z^T M u <= 0.
ADirection a_direction(const Discretization& disc, const SpinorField& u, AOperatorSolver& solver,
                       const SpMat* assembled_a = nullptr);

/// normalize(A(u)^{-1} M u).
SpinorField a_step_plain(const Discretization& disc, const SpinorField& u, AOperatorSolver* solver = nullptr);

struct AStepResult {
  SpinorField u;
  double tau = 0.0;
  double gamma = 0.0;
  double energy = 0.0;
};

/// normalize(u + tau d) with tau from the configured strategy.
AStepResult a_step_damped(const Discretization& disc, const SpinorField& u, const AStepConfig& cfg,
                          std::optional<double> warm_tau = std::nullopt, AOperatorSolver* solver = nullptr,
                          const SpMat* assembled_a = nullptr);

/// Minimizes phi over [lo, hi] by golden-section search, probing `warm` first
/// and finally an endpoint the bracket has not moved away from. Returns the
/// best evaluated point and its value.
struct LineSearchResult {
  double tau;
  double value;
  int evaluations;
};
LineSearchResult golden_section(const std::function<double(double)>& phi, double lo, double hi, int budget,
                                std::optional<double> warm = std::nullopt);

/// Damped A-iteration until the stopping rule holds. The energy is
/// non-increasing along the history up to rounding.
MethodResult run_a_method(const Discretization& disc, const SpinorField& u0, const AStepConfig& cfg,
                          const StoppingRule& stop, const IterationObserver& observer = {});

}  // namespace sogpe
