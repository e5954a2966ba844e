#include "sogpe/a_method.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "sogpe/errors.hpp"

namespace sogpe {

void AStepConfig::validate() const {
  if (strategy == TauStrategy::Fixed) {
    if (!(tau > 0.0 && tau < 2.0)) throw ConfigError("fixed step size must lie in (0, 2)");
    return;
  }
  if (!(tau_min > 0.0 && tau_min <= tau_max && tau_max < 2.0)) {
    throw ConfigError("line-search interval must satisfy 0 < tau_min <= tau_max < 2");
  }
  if (line_search_evals < 3) throw ConfigError("line search needs at least 3 energy evaluations");
}

// ---------------------------------------------------------------------------

AOperatorSolver::AOperatorSolver(const Discretization& disc) : disc_(&disc) {}
AOperatorSolver::~AOperatorSolver() = default;

Vec AOperatorSolver::solve(const SpMat& a, const Vec& rhs) {
  if (!lu_) {
    try {
      if (chol_) {
        chol_->refactor(a);
      } else {
        chol_ = std::make_unique<Factorization>(a, Factorization::Method::HermitianCholesky, 2);
      }
      return chol_->solve(rhs);
    } catch (const SingularMatrix&) {
      chol_.reset();
    }
  }
  if (lu_) {
    lu_->refactor(a);
  } else {
    lu_ = std::make_unique<Factorization>(a, Factorization::Method::Lu);
  }
  return lu_->solve(rhs);
}

Vec AOperatorSolver::solve(const SpinorField& u, const Vec& rhs) { return solve(assemble_A(*disc_, u), rhs); }

// ---------------------------------------------------------------------------

ADirection a_direction(const Discretization& disc, const SpinorField& u, AOperatorSolver& solver,
                       const SpMat* assembled_a) {
  const Vec mu = disc.mass_padded() * u.coeffs();
  ADirection dir;
  dir.z = assembled_a ? solver.solve(*assembled_a, mu) : solver.solve(u, mu);
  const double zmu = dir.z.dot(mu);
  if (!(zmu > 0.0)) {
    throw NumericalError("A(u) is not positive on u (z^T M u = " + std::to_string(zmu) + ")");
  }
  dir.gamma = 1.0 / zmu;
  dir.d = dir.gamma * dir.z - u.coeffs();
  return dir;
}

SpinorField a_step_plain(const Discretization& disc, const SpinorField& u, AOperatorSolver* solver) {
  AOperatorSolver local(disc);
  const ADirection dir = a_direction(disc, u, solver ? *solver : local);
  return normalize(disc, SpinorField(u.space_ptr(), dir.z));
}

LineSearchResult golden_section(const std::function<double(double)>& phi, double lo, double hi, int budget,
                                std::optional<double> warm) {
  LineSearchResult best{lo, std::numeric_limits<double>::infinity(), 0};
  const auto eval = [&](double t) {
    const double v = phi(t);
    ++best.evaluations;
    if (v < best.value) {
      best.value = v;
      best.tau = t;
    }
    return v;
  };
  if (warm && *warm >= lo && *warm <= hi) eval(*warm);
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval(c);
  double fd = best.evaluations < budget ? eval(d) : fc;
  // One evaluation is kept for an endpoint the bracket still touches.
  while (best.evaluations < budget - 1) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d);
    }
  }
  if (best.evaluations < budget) {
    if (a == lo) {
      eval(lo);
    } else if (b == hi) {
      eval(hi);
    }
  }
  return best;
}

AStepResult a_step_damped(const Discretization& disc, const SpinorField& u, const AStepConfig& cfg,
                          std::optional<double> warm_tau, AOperatorSolver* solver, const SpMat* assembled_a) {
  cfg.validate();
  AOperatorSolver local(disc);
  const ADirection dir = a_direction(disc, u, solver ? *solver : local, assembled_a);

  const Vec& c = u.coeffs();
  const SpMat& lin = disc.linear_operator();
  const SpMat& m = disc.mass_padded();
  const Vec lin_c = lin * c;
  const Vec lin_d = lin * dir.d;
  const Vec m_c = m * c;
  const Vec m_d = m * dir.d;
  const double q0 = c.dot(lin_c), q1 = 2.0 * c.dot(lin_d), q2 = dir.d.dot(lin_d);
  const double n0 = c.dot(m_c), n1 = 2.0 * c.dot(m_d), n2 = dir.d.dot(m_d);
  // The interaction integral of u + t d is a quartic in t, fitted from five samples.
  Eigen::Matrix<double, 5, 5> vander;
  Eigen::Matrix<double, 5, 1> samples;
  for (int k = 0; k < 5; ++k) {
    const double t = k - 2.0;
    for (int j = 0; j < 5; ++j) vander(k, j) = std::pow(t, j);
    samples[k] = interaction_integral(disc, SpinorField(u.space_ptr(), c + t * dir.d));
  }
  const Eigen::Matrix<double, 5, 1> quartic = vander.fullPivLu().solve(samples);
  const auto phi = [&](double t) {
    const double nsq = n0 + t * n1 + t * t * n2;
    const double inter = quartic[0] + t * (quartic[1] + t * (quartic[2] + t * (quartic[3] + t * quartic[4])));
    return 0.5 * (q0 + t * q1 + t * t * q2) / nsq + 0.5 * inter / (nsq * nsq);
  };

  AStepResult out;
  out.gamma = dir.gamma;
  if (cfg.strategy == AStepConfig::TauStrategy::Fixed) {
    out.tau = cfg.tau;
    out.energy = phi(cfg.tau);
  } else {
    const auto best = golden_section(phi, cfg.tau_min, cfg.tau_max, cfg.line_search_evals, warm_tau);
    out.tau = best.tau;
    out.energy = best.value;
  }
  out.u = normalize(disc, SpinorField(u.space_ptr(), c + out.tau * dir.d));
  return out;
}

MethodResult run_a_method(const Discretization& disc, const SpinorField& u0, const AStepConfig& cfg,
                          const StoppingRule& stop, const IterationObserver& observer) {
  cfg.validate();
  stop.validate();
  using clock = std::chrono::steady_clock;

  MethodResult result;
  SpinorField u = u0;
  SpMat a = assemble_A(disc, u);
  StateSummary current = summarize(disc, u, a);
  result.state = {u, current.lambda};
  const std::string tag = method_tag('A', u);
  AOperatorSolver solver(disc);
  std::optional<double> warm;

  if (stop.max_iters == 0) {
    result.reason = StopReason::IterationCap;
    result.diagnostics = "iteration cap of 0 reached";
    return result;
  }
  for (int n = 1;; ++n) {
    const auto t0 = clock::now();
    const AStepResult step = a_step_damped(disc, u, cfg, warm, &solver, &a);
    warm = step.tau;
    u = step.u;
    a = assemble_A(disc, u);
    const StateSummary next = summarize(disc, u, a);

    IterationRecord rec;
    rec.iter = n;
    rec.method = tag;
    rec.energy = next.energy;
    rec.lambda = next.lambda;
    rec.residual = next.residual;
    rec.tau = step.tau;
    rec.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    result.history.push_back(rec);
    result.state = {u, next.lambda};
    if (observer) observer(rec, u);

    const auto reason = check_stop(stop, n, current.energy, rec);
    current = next;
    if (reason) {
      result.reason = *reason;
      if (*reason == StopReason::IterationCap) {
        result.diagnostics = "iteration cap of " + std::to_string(stop.max_iters) + " reached";
      }
      return result;
    }
  }
}

}  // namespace sogpe
