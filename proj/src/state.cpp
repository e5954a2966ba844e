#include "sogpe/state.hpp"

#include <cmath>

#include "sogpe/errors.hpp"

namespace sogpe {

namespace {

void require_unit_mass(const Discretization& disc, const SpinorField& u) {
  const double m = mass(disc, u);
  if (!(std::abs(m - 1.0) <= kMassTolerance)) {
    throw NumericalError("state is not normalized (mass " + std::to_string(m) + ")");
  }
}

double dual_norm(const Discretization& disc, const Vec& r) {
  const int n = disc.dofs();
  double sum = 0.0;
  for (int p = 0; p < 4; ++p) {
    const Vec seg = r.segment(static_cast<Eigen::Index>(p) * n, n);
    sum += seg.dot(disc.solve_mass(seg));
  }
  return std::sqrt(std::max(sum, 0.0));
}

}  // namespace

SpinorField initial_state(const Discretization& disc) {
  const FeSpace& space = disc.space();
  const auto profile = [](double x, double y) { return (x * x - 1.0) * (y * y - 1.0); };
  const auto phase = [](double x, double y) { return -0.5 * (x * x + y * y); };
  const int n = space.dofs();
  Vec c(4 * n);
  c.segment(0 * n, n) = interpolate(space, [&](double x, double y) { return 0.5 * profile(x, y) * std::cos(phase(x, y)); });
  c.segment(1 * n, n) = interpolate(space, [&](double x, double y) { return 0.5 * profile(x, y) * std::sin(phase(x, y)); });
  c.segment(2 * n, n) = interpolate(space, [&](double x, double y) { return profile(x, y) * std::cos(phase(x, y)); });
  c.segment(3 * n, n) = interpolate(space, [&](double x, double y) { return profile(x, y) * std::sin(phase(x, y)); });
  return normalize(disc, SpinorField(disc.space_ptr(), std::move(c)));
}

double mass(const Discretization& disc, const SpinorField& u) {
  if (u.dofs() != disc.dofs()) throw SpaceMismatch("state does not live on the discretization's space");
  return disc.mass(u.coeffs());
}

SpinorField normalize(const Discretization& disc, const SpinorField& u) {
  const double m = mass(disc, u);
  if (!(m > 0.0) || !std::isfinite(m)) throw NumericalError("cannot normalize a state of mass " + std::to_string(m));
  return SpinorField(u.space_ptr(), u.coeffs() / std::sqrt(m));
}

double energy(const Discretization& disc, const SpinorField& u) {
  if (u.dofs() != disc.dofs()) throw SpaceMismatch("state does not live on the discretization's space");
  const Vec& c = u.coeffs();
  return 0.5 * c.dot(disc.linear_operator() * c) + 0.5 * interaction_integral(disc, u);
}

double rayleigh_lambda(const Discretization& disc, const SpinorField& u) {
  require_unit_mass(disc, u);
  const Vec& c = u.coeffs();
  return c.dot(assemble_A(disc, u) * c);
}

double residual_norm(const Discretization& disc, const SpinorField& u, double lambda) {
  const Vec& c = u.coeffs();
  const Vec r = assemble_A(disc, u) * c - lambda * (disc.mass_padded() * c);
  return dual_norm(disc, r);
}

StateSummary summarize(const Discretization& disc, const SpinorField& u) {
  return summarize(disc, u, assemble_A(disc, u));
}

StateSummary summarize(const Discretization& disc, const SpinorField& u, const SpMat& a) {
  require_unit_mass(disc, u);
  const Vec& c = u.coeffs();
  const Vec au = a * c;
  StateSummary s;
  s.energy = energy(disc, u);
  s.lambda = c.dot(au);
  s.residual = dual_norm(disc, au - s.lambda * (disc.mass_padded() * c));
  return s;
}

SpinorField align_phase(const Discretization& disc, const SpinorField& u, const SpinorField& target) {
  if (!u.same_space(target)) throw SpaceMismatch("fields live on different spaces");
  const Vec gv = disc.h1_padded() * target.coeffs();
  const double a = u.coeffs().dot(gv);
  const double b = u.times_i().coeffs().dot(gv);
  const double omega = (a == 0.0 && b == 0.0) ? 0.0 : std::atan2(b, a);
  return u.rotated(omega);
}

double h1_distance(const Discretization& disc, const SpinorField& u, const SpinorField& v) {
  if (!u.same_space(v)) throw SpaceMismatch("fields live on different spaces");
  const Vec d = u.coeffs() - v.coeffs();
  return std::sqrt(std::max(d.dot(disc.h1_padded() * d), 0.0));
}

double quotient_distance(const Discretization& disc, const SpinorField& u, const SpinorField& v) {
  return h1_distance(disc, align_phase(disc, u, v), v);
}

std::array<Vec, 2> density(const SpinorField& u) {
  const FeSpace& space = u.space();
  std::array<Vec, 2> d;
  for (int c = 0; c < 2; ++c) {
    const Vec re = space.expand(u.part(2 * c));
    const Vec im = space.expand(u.part(2 * c + 1));
    d[c] = re.cwiseAbs2() + im.cwiseAbs2();
  }
  return d;
}

double density_distance(const Discretization& disc, const SpinorField& u, const SpinorField& v) {
  const SpinorField* fields[] = {&u, &v};
  const double sq = integrate_pointwise(disc, fields, [](const Point&, std::span<const double> w) {
    const double d1 = w[0] * w[0] + w[1] * w[1] - w[4] * w[4] - w[5] * w[5];
    const double d2 = w[2] * w[2] + w[3] * w[3] - w[6] * w[6] - w[7] * w[7];
    return d1 * d1 + d2 * d2;
  });
  return std::sqrt(std::max(sq, 0.0));
}

}  // namespace sogpe
