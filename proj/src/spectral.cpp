#include "sogpe/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include <Eigen/Eigenvalues>

#include "sogpe/errors.hpp"
#include "sogpe/j_method.hpp"
#include "sogpe/linsolve.hpp"

namespace sogpe {

namespace {

constexpr double kBasisCollapse = 1e-13;
constexpr double kComplexWarning = 1e-10;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

void require_converged(const Discretization& disc, const Eigenpair& pair, const SpectralOptions& opts) {
  const double res = residual_norm(disc, pair.u, pair.lambda);
  if (!(res <= opts.converged_tol)) {
    throw NumericalError("spectral analysis needs a converged eigenpair (residual " + sci(res) + " > " +
                         sci(opts.converged_tol) + ")");
  }
}

Mat random_basis(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist;
  Mat x(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) x(i, j) = dist(gen);
  return x;
}

// Columns of the result span the same space and are orthonormal in the M inner product.
Mat m_orthonormalize(Mat y, const SpMat& m) {
  for (int pass = 0; pass < 2; ++pass) {
    Mat g = y.transpose() * (m * y);
    g = 0.5 * (g + g.transpose()).eval();
    const Eigen::SelfAdjointEigenSolver<Mat> es(g);
    const Vec d = es.eigenvalues();
    if (!(d.minCoeff() > kBasisCollapse * d.maxCoeff())) {
      throw NumericalError("subspace basis collapsed during orthonormalization");
    }
    y = y * es.eigenvectors() * d.cwiseSqrt().cwiseInverse().asDiagonal();
  }
  return y;
}

SpMat bordered(const SpMat& a, const Vec& c) {
  const Eigen::Index n = a.rows();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(a.nonZeros() + 2 * n));
  for (Eigen::Index col = 0; col < a.outerSize(); ++col)
    for (SpMat::InnerIterator it(a, col); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (c[i] == 0.0) continue;
    t.emplace_back(i, n, c[i]);
    t.emplace_back(n, i, c[i]);
  }
  SpMat b(n + 1, n + 1);
  b.setFromTriplets(t.begin(), t.end());
  return b;
}

}  // namespace

std::vector<double> projected_hessian_eigs(const Discretization& disc, const Eigenpair& pair, int k,
                                           const SpectralOptions& opts) {
  if (k < 1) throw ConfigError("eigenvalue count must be >= 1");
  require_converged(disc, pair, opts);
  const SpMat h = assemble_Hessian(disc, pair.u);
  const SpMat& m = disc.mass_padded();
  const Vec& u = pair.u.coeffs();
  const Vec mu = m * u;
  const Eigen::Index n = h.rows();
  if (k > n - 1) throw ConfigError("eigenvalue count exceeds the tangent dimension");
  const Eigen::Index width = std::min<Eigen::Index>(k + opts.oversampling, n - 1);

  const double shift = pair.lambda - opts.hessian_shift * std::max(1.0, std::abs(pair.lambda));
  const SpMat shifted = h - shift * m;
  const Factorization lu(bordered(shifted, mu), Factorization::Method::Lu);
  const auto to_tangent = [&](Mat& x) { x -= u * (mu.transpose() * x); };

  Mat x = random_basis(n, width, opts.seed);
  to_tangent(x);
  x = m_orthonormalize(x, m);
  double worst = 0.0;
  for (int it = 0; it < opts.max_iters; ++it) {
    Mat rhs = Mat::Zero(n + 1, width);
    rhs.topRows(n) = m * x;
    Mat y = lu.solve_many(rhs).topRows(n);
    to_tangent(y);
    y = m_orthonormalize(y, m);
    const Mat hy = h * y;
    Mat g = y.transpose() * hy;
    g = 0.5 * (g + g.transpose()).eval();
    const Eigen::SelfAdjointEigenSolver<Mat> es(g);
    x = y * es.eigenvectors();
    const Mat hx = hy * es.eigenvectors();
    const Mat mx = m * x;
    worst = 0.0;
    for (int j = 0; j < k; ++j) {
      const double theta = es.eigenvalues()[j];
      Vec r = hx.col(j) - theta * mx.col(j);
      r -= mu * u.dot(r);
      worst = std::max(worst, r.norm() / (hx.col(j).norm() + std::abs(theta) * mx.col(j).norm()));
    }
    if (worst <= opts.eig_tol) {
      const Vec ev = es.eigenvalues().head(k);
      return {ev.data(), ev.data() + k};
    }
  }
  throw NumericalError("projected Hessian eigensolver stagnated (relative residual " + sci(worst) +
                       " after " + std::to_string(opts.max_iters) + " iterations)");
}

JGap j_gap(const Discretization& disc, const Eigenpair& pair, double sigma, const SpectralOptions& opts) {
  if (!std::isfinite(sigma)) throw ConfigError("shift must be finite");
  require_converged(disc, pair, opts);
  const ShiftedJOperator op(disc, pair.u, sigma);
  const SpMat& m = disc.mass_padded();
  const Eigen::Index n = m.rows();
  const Eigen::Index width = std::min<Eigen::Index>(2 * std::max(opts.oversampling, 2), n - 2);

  Mat q(n, 2);
  q.col(0) = pair.u.coeffs();
  q.col(1) = pair.u.times_i().coeffs();
  q = m_orthonormalize(q, m);

  JGap gap;
  for (int c = 0; c < 2; ++c) {
    const Vec mv = m * q.col(c);
    const Vec r = op.apply(q.col(c)) + (sigma - pair.lambda) * mv;
    gap.deflation_residual = std::max(gap.deflation_residual, r.norm() / (std::abs(pair.lambda) * mv.norm()));
  }
  const auto deflate = [&](Mat& x) { x -= q * (q.transpose() * (m * x)); };

  Mat x = random_basis(n, width, opts.seed);
  deflate(x);
  x = m_orthonormalize(x, m);
  double rel = 0.0;
  for (int it = 0; it < opts.max_iters; ++it) {
    const Mat mx = m * x;
    Mat z(n, width);
    for (Eigen::Index j = 0; j < width; ++j) z.col(j) = op.solve(mx.col(j)).y;
    deflate(z);
    const Mat g = mx.transpose() * z;
    const Eigen::EigenSolver<Mat> es(g);
    Eigen::Index best = 0;
    es.eigenvalues().cwiseAbs().maxCoeff(&best);
    const std::complex<double> theta = es.eigenvalues()[best];
    const Eigen::VectorXcd coef = es.eigenvectors().col(best);
    const Eigen::VectorXcd xv = x.cast<std::complex<double>>() * coef;
    const Eigen::VectorXcd r = z.cast<std::complex<double>>() * coef - theta * xv;
    rel = r.norm() / (std::abs(theta) * xv.norm());
    if (rel <= opts.eig_tol) {
      gap.mu0 = sigma + 1.0 / theta;
      gap.predicted_rate = std::abs(pair.lambda - sigma) / std::abs(gap.mu0 - sigma);
      const Vec re = xv.real();
      const Vec im = xv.imag();
      const double scale = std::sqrt(re.dot(m * re) + im.dot(m * im));
      gap.deflated_overlap =
          std::max((q.transpose() * (m * re)).cwiseAbs().maxCoeff(), (q.transpose() * (m * im)).cwiseAbs().maxCoeff()) /
          scale;
      if (std::abs(gap.mu0.imag()) > kComplexWarning * std::abs(gap.mu0)) {
        gap.warnings.push_back("nearest J-eigenvalue is complex; the rate uses |mu0 - sigma|");
      }
      return gap;
    }
    x = m_orthonormalize(z, m);
  }
  throw NumericalError("J-spectrum subspace iteration stagnated (relative residual " + sci(rel) +
                       " after " + std::to_string(opts.max_iters) + " iterations)");
}

SpectralReport spectral_report(const Discretization& disc, const Eigenpair& pair, int k,
                               std::optional<double> sigma, const SpectralOptions& opts) {
  SpectralReport report;
  report.lambda = pair.lambda;
  report.hessian_smallest = projected_hessian_eigs(disc, pair, k, opts);
  if (sigma) {
    const JGap gap = j_gap(disc, pair, *sigma, opts);
    report.sigma = sigma;
    report.mu0 = gap.mu0;
    report.predicted_rate = gap.predicted_rate;
    report.deflation_residual = gap.deflation_residual;
    report.warnings = gap.warnings;
  }
  return report;
}

}  // namespace sogpe
