#include "sogpe/j_method.hpp"

#include <chrono>
#include <cmath>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "sogpe/errors.hpp"

namespace sogpe {

namespace {

constexpr double kCapacitanceTolerance = 1e-14;
constexpr double kRetryPerturbation = 1e-8;
constexpr double kEnergyRiseTolerance = 1e-6;
constexpr int kMaxEnergyRises = 3;

double inf_norm(const SpMat& a) {
  Vec rows = Vec::Zero(a.rows());
  for (Eigen::Index c = 0; c < a.outerSize(); ++c)
    for (SpMat::InnerIterator it(a, c); it; ++it) rows[it.row()] += std::abs(it.value());
  return a.rows() > 0 ? rows.maxCoeff() : 0.0;
}

}  // namespace

void ShiftPolicy::validate() const {
  if (freeze_after && *freeze_after < 0) throw ConfigError("freeze_after must be >= 0");
  if (mode == Mode::Fixed && !std::isfinite(sigma)) throw ConfigError("fixed shift must be finite");
}

// ---------------------------------------------------------------------------

ShiftedJOperator::ShiftedJOperator(const Discretization& disc, const SpinorField& u, double sigma)
    : disc_(&disc), u_(u), sigma_(sigma) {
  rebuild();
}

ShiftedJOperator::~ShiftedJOperator() = default;
ShiftedJOperator::ShiftedJOperator(ShiftedJOperator&&) noexcept = default;
ShiftedJOperator& ShiftedJOperator::operator=(ShiftedJOperator&&) noexcept = default;

void ShiftedJOperator::update(const SpinorField& u, double sigma) {
  u_ = u;
  sigma_ = sigma;
  rebuild();
}

void ShiftedJOperator::rebuild() {
  if (!std::isfinite(sigma_)) throw ConfigError("shift must be finite");
  parts_ = assemble_J_parts(*disc_, u_, sigma_);
  try {
    if (lu_) {
      lu_->refactor(parts_.C);
    } else {
      lu_ = std::make_unique<Factorization>(parts_.C, Factorization::Method::Lu);
    }
  } catch (const SingularMatrix& e) {
    lu_.reset();
    throw ShiftOnSpectrum("shift lies on the spectrum: C is singular (" + std::string(e.what()) + ")", sigma_);
  }
  z_ = lu_->solve_many(parts_.factors.U);
  capacitance_ = Eigen::Matrix2d::Identity() + parts_.factors.V * z_;
  const Eigen::JacobiSVD<Eigen::Matrix2d> svd(capacitance_);
  const auto sv = svd.singularValues();
  if (!(sv[1] > kCapacitanceTolerance * sv[0])) {
    throw ShiftOnSpectrum("shift lies on the spectrum: singular capacitance matrix", sigma_);
  }
  c_norm_ = inf_norm(parts_.C);
  u_norm_ = parts_.factors.U.lpNorm<Eigen::Infinity>();
}

Vec ShiftedJOperator::apply(const Vec& x) const {
  return parts_.C * x + parts_.factors.U * (parts_.factors.V * x);
}

WoodburySolve ShiftedJOperator::solve(const Vec& b) const {
  WoodburySolve w;
  w.z1 = lu_->solve(b);
  w.Z = z_;
  w.z2 = capacitance_.partialPivLu().solve(parts_.factors.V * w.z1);
  w.y = w.z1 - z_ * w.z2;
  const Vec r = apply(w.y) - b;
  const double bound =
      kWoodburyTolerance * (b.lpNorm<Eigen::Infinity>() + c_norm_ * w.y.lpNorm<Eigen::Infinity>() +
                            u_norm_ * (parts_.factors.V * w.y).lpNorm<Eigen::Infinity>());
  if (!w.y.allFinite() || r.lpNorm<Eigen::Infinity>() > bound) {
    throw NumericalError("Woodbury solve failed its residual check");
  }
  const double bn = b.norm();
  w.relative_residual = bn > 0.0 ? r.norm() / bn : r.norm();
  return w;
}

// ---------------------------------------------------------------------------

JStepResult j_step(const Discretization& disc, const SpinorField& u, const ShiftedJOperator& op) {
  const Vec mu = disc.mass_padded() * u.coeffs();
  JStepResult out;
  out.solve = op.solve(mu);
  Vec y = out.solve.y;
  if (y.dot(mu) < 0.0) y = -y;
  out.u = normalize(disc, SpinorField(u.space_ptr(), std::move(y)));
  return out;
}

JStepResult j_step(const Discretization& disc, const SpinorField& u, double sigma) {
  const ShiftedJOperator op(disc, u, sigma);
  return j_step(disc, u, op);
}

std::complex<double> complex_l2(const Discretization& disc, const SpinorField& f, const SpinorField& g) {
  if (!f.same_space(g)) throw SpaceMismatch("fields live on different spaces");
  const SpMat& m = disc.constants().mass;
  double re = 0.0;
  double im = 0.0;
  for (int c = 0; c < 2; ++c) {
    const Vec mgr = m * g.part(2 * c);
    const Vec mgi = m * g.part(2 * c + 1);
    re += f.part(2 * c).dot(mgr) + f.part(2 * c + 1).dot(mgi);
    im += f.part(2 * c + 1).dot(mgr) - f.part(2 * c).dot(mgi);
  }
  return {re, im};
}

SpinorField j_step_phase_locked(const Discretization& disc, const SpinorField& u_ref, const SpinorField& u,
                                double sigma) {
  const ShiftedJOperator op(disc, u, sigma);
  const WoodburySolve w = op.solve(disc.mass_padded() * u.coeffs());
  const SpinorField y(u.space_ptr(), w.y);
  const std::complex<double> corr = complex_l2(disc, u_ref, y);
  const std::complex<double> theta = std::abs(corr) > 0.0 ? corr / std::abs(corr) : std::complex<double>(1.0);
  return normalize(disc, y).scaled(theta);
}

// ---------------------------------------------------------------------------

MethodResult run_j_method(const Discretization& disc, const SpinorField& u0, const ShiftPolicy& policy,
                          const StoppingRule& stop, const IterationObserver& observer) {
  policy.validate();
  stop.validate();
  using clock = std::chrono::steady_clock;

  MethodResult result;
  SpinorField u = u0;
  StateSummary current = summarize(disc, u);
  result.state = {u, current.lambda};
  const std::string tag = method_tag('J', u);
  const bool adaptive = policy.mode == ShiftPolicy::Mode::Adaptive;
  double sigma = adaptive ? current.lambda : policy.sigma;
  std::unique_ptr<ShiftedJOperator> op;
  int rises = 0;

  const auto abort = [&](const std::string& why) {
    result.reason = StopReason::Aborted;
    result.diagnostics = why;
    return result;
  };

  if (stop.max_iters == 0) {
    result.reason = StopReason::IterationCap;
    result.diagnostics = "iteration cap of 0 reached";
    return result;
  }
  for (int n = 1;; ++n) {
    const auto t0 = clock::now();
    if (adaptive && (!policy.freeze_after || n <= std::max(1, *policy.freeze_after))) sigma = current.lambda;

    JStepResult step;
    try {
      for (int attempt = 0;; ++attempt) {
        try {
          if (op) {
            op->update(u, sigma);
          } else {
            op = std::make_unique<ShiftedJOperator>(disc, u, sigma);
          }
          break;
        } catch (const ShiftOnSpectrum& e) {
          op.reset();
          if (attempt > 0) throw;
          sigma *= 1.0 + kRetryPerturbation;
        }
      }
      step = j_step(disc, u, *op);
    } catch (const NumericalError& e) {
      return abort("iteration " + std::to_string(n) + " with shift " + std::to_string(sigma) + ": " + e.what());
    }

    u = step.u;
    const StateSummary next = summarize(disc, u);
    IterationRecord rec;
    rec.iter = n;
    rec.method = tag;
    rec.energy = next.energy;
    rec.lambda = next.lambda;
    rec.residual = next.residual;
    rec.sigma = sigma;
    rec.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    result.history.push_back(rec);
    result.state = {u, next.lambda};
    if (observer) observer(rec, u);

    rises = next.energy - current.energy > kEnergyRiseTolerance ? rises + 1 : 0;
    const double previous_energy = current.energy;
    current = next;
    if (rises >= kMaxEnergyRises) {
      return abort("energy increased in " + std::to_string(rises) + " consecutive iterations (last E = " +
                   std::to_string(next.energy) + ", shift " + std::to_string(sigma) + ")");
    }
    if (const auto reason = check_stop(stop, n, previous_energy, rec)) {
      result.reason = *reason;
      if (*reason == StopReason::IterationCap) {
        result.diagnostics = "iteration cap of " + std::to_string(stop.max_iters) + " reached";
      }
      return result;
    }
  }
}

}  // namespace sogpe
