#include "sogpe/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>

#include "sogpe/errors.hpp"
#include "sogpe/parallel.hpp"
#include "sogpe/quadrature.hpp"

namespace sogpe {

namespace {

struct Geometry {
  Point origin;
  double jac[2][2];      // columns p1 - p0, p2 - p0
  double inv_t[2][2];    // J^{-T}
  double area;

  Geometry(const FeSpace& space, std::span<const int> tri) {
    const auto& p0 = space.nodes()[tri[0]];
    const auto& p1 = space.nodes()[tri[1]];
    const auto& p2 = space.nodes()[tri[2]];
    origin = p0;
    jac[0][0] = p1[0] - p0[0];
    jac[1][0] = p1[1] - p0[1];
    jac[0][1] = p2[0] - p0[0];
    jac[1][1] = p2[1] - p0[1];
    const double det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    area = 0.5 * std::abs(det);
    inv_t[0][0] = jac[1][1] / det;
    inv_t[0][1] = -jac[1][0] / det;
    inv_t[1][0] = -jac[0][1] / det;
    inv_t[1][1] = jac[0][0] / det;
  }

  Point map(double xi, double eta) const {
    return {origin[0] + jac[0][0] * xi + jac[0][1] * eta, origin[1] + jac[1][0] * xi + jac[1][1] * eta};
  }
  std::array<double, 2> gradient(const std::array<double, 2>& ref) const {
    return {inv_t[0][0] * ref[0] + inv_t[0][1] * ref[1], inv_t[1][0] * ref[0] + inv_t[1][1] * ref[1]};
  }
};

/// Shape values and reference gradients tabulated at the points of a rule.
struct Tabulation {
  int lc;
  const TriangleRule* rule;
  std::vector<std::array<double, 6>> phi;
  std::vector<std::array<std::array<double, 2>, 6>> dphi;

  Tabulation(int order, const TriangleRule& r) : lc(shape::local_count(order)), rule(&r) {
    phi.resize(r.size());
    dphi.resize(r.size());
    for (std::size_t q = 0; q < r.size(); ++q) {
      const double xi = r.points[q][1];
      const double eta = r.points[q][2];
      shape::values(order, xi, eta, phi[q]);
      shape::gradients(order, xi, eta, dphi[q]);
    }
  }
};

/// Element loop with deterministic scatter: local matrices of a chunk are
/// computed (possibly in parallel), then added in element order.
template <class LocalFn>
std::vector<Vec> assemble_elements(const FeSpace& space, const ScalarPattern& pattern, int nmat, LocalFn&& local) {
  const int lc = space.local_count();
  const std::size_t block = static_cast<std::size_t>(nmat) * lc * lc;
  const std::size_t ne = space.triangle_count();
  std::vector<Vec> out(nmat, Vec::Zero(pattern.nnz()));
  constexpr std::size_t kChunk = 4096;
  std::vector<double> buffer(kChunk * block);
  const int threads = thread_count();
  for (std::size_t start = 0; start < ne; start += kChunk) {
    const std::size_t stop = std::min(ne, start + kChunk);
    const auto count = static_cast<long>(stop - start);
#pragma omp parallel for schedule(static) num_threads(threads) if (threads > 1)
    for (long k = 0; k < count; ++k) {
      std::span<double> dst(buffer.data() + k * block, block);
      std::fill(dst.begin(), dst.end(), 0.0);
      local(start + static_cast<std::size_t>(k), dst);
    }
    for (std::size_t t = start; t < stop; ++t) {
      const double* src = buffer.data() + (t - start) * block;
      for (int a = 0; a < lc; ++a) {
        for (int b = 0; b < lc; ++b) {
          const int pos = pattern.scatter(t, a, b);
          if (pos < 0) continue;
          for (int m = 0; m < nmat; ++m) out[m][pos] += src[(m * lc + a) * lc + b];
        }
      }
    }
  }
  return out;
}

/// Degree-8 tabulation, exact for quartic expressions in P2 functions.
const Tabulation& exact_tabulation(int order) {
  static const Tabulation tab1(1, triangle_rule(8));
  static const Tabulation tab2(2, triangle_rule(8));
  return order == 1 ? tab1 : tab2;
}

constexpr std::array<int, 4> kProductOffset{0, 4, 7, 9};

double norm_sq(const Discretization& disc, const SpinorField& u) {
  const double m = disc.mass(u.coeffs());
  if (!(m > 0.0)) throw NumericalError("operator undefined for the zero state");
  return m;
}

void check_space(const Discretization& disc, const SpinorField& u) {
  if (!u.space_ptr() || u.dofs() != disc.dofs() || !(u.space().domain() == disc.space().domain()) ||
      u.space().order() != disc.space().order()) {
    throw SpaceMismatch("state does not live on the discretization's space");
  }
}

/// Values (on the scalar pattern) of int u_a u_b phi_i phi_j; only the two
/// densities when `all` is false.
std::vector<Vec> weighted_values(const Discretization& disc, const SpinorField& u, bool all) {
  check_space(disc, u);
  const FeSpace& space = disc.space();
  const Tabulation& t8 = exact_tabulation(space.order());
  const int lc = t8.lc;
  const double area = space.element_area();

  std::array<Vec, 4> nodal;
  for (int p = 0; p < 4; ++p) nodal[p] = space.expand(u.part(p));

  const int nmat = all ? 10 : 2;
  return assemble_elements(space, disc.scalar_pattern(), nmat, [&](std::size_t e, std::span<double> dst) {
    const auto tri = space.triangle(e);
    for (std::size_t q = 0; q < t8.rule->size(); ++q) {
      const auto& phi = t8.phi[q];
      std::array<double, 4> val{};
      for (int p = 0; p < 4; ++p) {
        double s = 0.0;
        for (int a = 0; a < lc; ++a) s += phi[a] * nodal[p][tri[a]];
        val[p] = s;
      }
      std::array<double, 10> w{};
      if (all) {
        int k = 0;
        for (int a = 0; a < 4; ++a)
          for (int b = a; b < 4; ++b) w[k++] = val[a] * val[b];
      } else {
        w[0] = val[0] * val[0] + val[1] * val[1];
        w[1] = val[2] * val[2] + val[3] * val[3];
      }
      const double wq = t8.rule->weights[q] * area;
      for (int a = 0; a < lc; ++a) {
        for (int b = a; b < lc; ++b) {
          const double pp = wq * phi[a] * phi[b];
          for (int m = 0; m < nmat; ++m) {
            const double v = w[m] * pp;
            dst[(m * lc + a) * lc + b] += v;
            if (b != a) dst[(m * lc + b) * lc + a] += v;
          }
        }
      }
    }
  });
}

std::array<Vec, 2> densities_from_products(const std::vector<Vec>& p) {
  return {p[WeightedOperators::product_index(0, 0)] + p[WeightedOperators::product_index(1, 1)],
          p[WeightedOperators::product_index(2, 2)] + p[WeightedOperators::product_index(3, 3)]};
}

int component(int part) { return part / 2; }

/// A(u) with the nonlinear weights scaled by `s`, optionally plus the
/// symmetric I1 block (also scaled by s).
SpMat nonlinear_operator(const Discretization& disc, const SpinorField& u, double s, bool with_i1,
                         std::vector<Vec>* products_out = nullptr) {
  const auto& prm = disc.params();
  const auto& bp = disc.block_pattern();
  std::vector<Vec> prod = weighted_values(disc, u, with_i1);
  std::array<Vec, 2> dens;
  if (with_i1) {
    dens = densities_from_products(prod);
  } else {
    dens = {prod[0], prod[1]};
  }

  SpMat a = disc.linear_operator();
  for (int p : {0, 1}) {
    bp.add(a, p, p, s * prm.beta11, dens[0]);
    bp.add(a, p, p, s * prm.beta12, dens[1]);
  }
  for (int p : {2, 3}) {
    bp.add(a, p, p, s * prm.beta12, dens[0]);
    bp.add(a, p, p, s * prm.beta22, dens[1]);
  }
  if (with_i1) {
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        const int cr = component(r);
        const int cc = component(c);
        const double beta = cr != cc ? prm.beta12 : (cr == 0 ? prm.beta11 : prm.beta22);
        if (beta == 0.0) continue;
        bp.add(a, r, c, 2.0 * s * beta, prod[WeightedOperators::product_index(r, c)]);
      }
    }
  }
  if (products_out) *products_out = std::move(prod);
  return a;
}

}  // namespace

// ---------------------------------------------------------------------------

double PhysicsParams::potential_shift() const {
  return potential_shift_enabled ? 0.5 * (std::abs(delta) + std::abs(omega) + 2.0 * k0 * k0) : 0.0;
}

void PhysicsParams::validate() const {
  for (double v : {delta, omega, k0, beta11, beta12, beta22}) {
    if (!std::isfinite(v)) throw ConfigError("physics parameters must be finite");
  }
  if (beta11 < 0.0 || beta12 < 0.0 || beta22 < 0.0) {
    throw ConfigError("interaction strengths must be nonnegative");
  }
}

int WeightedOperators::product_index(int a, int b) {
  if (a > b) std::swap(a, b);
  return kProductOffset[a] + (b - a);
}

const SpMat& WeightedOperators::product(int a, int b) const { return products[product_index(a, b)]; }

// ---------------------------------------------------------------------------

ScalarPattern::ScalarPattern(const FeSpace& space) : lc_(space.local_count()) {
  const int n = space.dofs();
  const std::size_t ne = space.triangle_count();
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(ne * lc_ * lc_);
  for (std::size_t t = 0; t < ne; ++t) {
    const auto tri = space.triangle(t);
    for (int a = 0; a < lc_; ++a) {
      const int ra = space.node_dof(tri[a]);
      if (ra < 0) continue;
      for (int b = 0; b < lc_; ++b) {
        const int cb = space.node_dof(tri[b]);
        if (cb >= 0) entries.emplace_back(ra, cb, 1.0);
      }
    }
  }
  pattern_.resize(n, n);
  pattern_.setFromTriplets(entries.begin(), entries.end());
  pattern_.makeCompressed();
  std::fill(pattern_.valuePtr(), pattern_.valuePtr() + pattern_.nonZeros(), 0.0);

  const int* outer = pattern_.outerIndexPtr();
  const int* inner = pattern_.innerIndexPtr();
  scatter_.assign(ne * lc_ * lc_, -1);
  for (std::size_t t = 0; t < ne; ++t) {
    const auto tri = space.triangle(t);
    for (int a = 0; a < lc_; ++a) {
      const int row = space.node_dof(tri[a]);
      if (row < 0) continue;
      for (int b = 0; b < lc_; ++b) {
        const int col = space.node_dof(tri[b]);
        if (col < 0) continue;
        const int* lo = inner + outer[col];
        const int* hi = inner + outer[col + 1];
        const int* it = std::lower_bound(lo, hi, row);
        scatter_[(t * lc_ + a) * lc_ + b] = static_cast<int>(it - inner);
      }
    }
  }
}

SpMat ScalarPattern::with_values(const Vec& values) const {
  SpMat m = pattern_;
  std::copy(values.data(), values.data() + values.size(), m.valuePtr());
  return m;
}

BlockPattern::BlockPattern(const ScalarPattern& scalar) {
  const SpMat& s = scalar.pattern();
  const int n = static_cast<int>(s.rows());
  const int* so = s.outerIndexPtr();
  const int* si = s.innerIndexPtr();
  const Eigen::Index nnz = s.nonZeros();

  pattern_.resize(4 * n, 4 * n);
  pattern_.resizeNonZeros(16 * nnz);
  int* outer = pattern_.outerIndexPtr();
  int* inner = pattern_.innerIndexPtr();
  for (auto& p : position_) p.assign(nnz, -1);

  int cursor = 0;
  for (int b = 0; b < 4; ++b) {
    for (int col = 0; col < n; ++col) {
      outer[b * n + col] = cursor;
      for (int a = 0; a < 4; ++a) {
        for (int k = so[col]; k < so[col + 1]; ++k) {
          inner[cursor] = a * n + si[k];
          position_[a * 4 + b][k] = cursor;
          ++cursor;
        }
      }
    }
  }
  outer[4 * n] = cursor;
  std::fill(pattern_.valuePtr(), pattern_.valuePtr() + pattern_.nonZeros(), 0.0);
}

void BlockPattern::add(SpMat& m, int a, int b, double coef, const Vec& scalar_values) const {
  if (coef == 0.0) return;
  double* v = m.valuePtr();
  const auto& pos = position_[a * 4 + b];
  for (std::size_t k = 0; k < pos.size(); ++k) v[pos[k]] += coef * scalar_values[static_cast<Eigen::Index>(k)];
}

void BlockPattern::add(SpMat& m, int a, int b, double coef, const SpMat& scalar) const {
  if (coef == 0.0) return;
  const Eigen::Map<const Vec> values(scalar.valuePtr(), scalar.nonZeros());
  add(m, a, b, coef, Vec(values));
}

// ---------------------------------------------------------------------------

ConstantOperators assemble_constants(const FeSpace& space, const PhysicsParams& params) {
  params.validate();
  const ScalarPattern pattern(space);
  const Tabulation t4(space.order(), triangle_rule(4));
  const Tabulation t8(space.order(), triangle_rule(8));
  const int lc = t4.lc;
  const double shift = params.potential_shift();
  const bool extra = params.extra_potential[0] || params.extra_potential[1];

  // S, M, L, then the two potential corrections (zero without an extra trap).
  auto values = assemble_elements(space, pattern, extra ? 5 : 3, [&](std::size_t e, std::span<double> dst) {
    const Geometry geo(space, space.triangle(e));
    auto at = [&](int m, int a, int b) -> double& { return dst[(m * lc + a) * lc + b]; };
    for (std::size_t q = 0; q < t4.rule->size(); ++q) {
      const double wq = t4.rule->weights[q] * geo.area;
      std::array<std::array<double, 2>, 6> grad;
      for (int a = 0; a < lc; ++a) grad[a] = geo.gradient(t4.dphi[q][a]);
      for (int a = 0; a < lc; ++a) {
        for (int b = 0; b < lc; ++b) {
          at(0, a, b) += wq * (grad[a][0] * grad[b][0] + grad[a][1] * grad[b][1]);
          at(1, a, b) += wq * t4.phi[q][a] * t4.phi[q][b];
          at(2, a, b) += wq * t4.phi[q][a] * grad[b][0];
        }
      }
    }
    if (!extra) return;
    for (std::size_t q = 0; q < t8.rule->size(); ++q) {
      const Point x = geo.map(t8.rule->points[q][1], t8.rule->points[q][2]);
      const double wq = t8.rule->weights[q] * geo.area;
      for (int c = 0; c < 2; ++c) {
        if (!params.extra_potential[c]) continue;
        const double v = params.extra_potential[c](x[0], x[1]);
        for (int a = 0; a < lc; ++a)
          for (int b = 0; b < lc; ++b) at(3 + c, a, b) += wq * v * t8.phi[q][a] * t8.phi[q][b];
      }
    }
  });

  ConstantOperators ops;
  ops.stiffness = pattern.with_values(values[0]);
  ops.mass = pattern.with_values(values[1]);
  ops.derivative_x = pattern.with_values(values[2]);
  for (int c = 0; c < 2; ++c) {
    Vec p = shift * values[1];
    if (extra) p += values[3 + c];
    ops.potential[c] = pattern.with_values(p);
  }
  return ops;
}

namespace {

SpMat assemble_full(const FeSpace& space, bool stiffness) {
  const Tabulation t4(space.order(), triangle_rule(4));
  const int lc = t4.lc;
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(space.triangle_count() * lc * lc);
  for (std::size_t e = 0; e < space.triangle_count(); ++e) {
    const auto tri = space.triangle(e);
    const Geometry geo(space, tri);
    for (std::size_t q = 0; q < t4.rule->size(); ++q) {
      const double wq = t4.rule->weights[q] * geo.area;
      for (int a = 0; a < lc; ++a) {
        const auto ga = geo.gradient(t4.dphi[q][a]);
        for (int b = 0; b < lc; ++b) {
          double v;
          if (stiffness) {
            const auto gb = geo.gradient(t4.dphi[q][b]);
            v = ga[0] * gb[0] + ga[1] * gb[1];
          } else {
            v = t4.phi[q][a] * t4.phi[q][b];
          }
          entries.emplace_back(tri[a], tri[b], wq * v);
        }
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(space.node_count());
  SpMat m(n, n);
  m.setFromTriplets(entries.begin(), entries.end());
  return m;
}

}  // namespace

SpMat assemble_full_mass(const FeSpace& space) { return assemble_full(space, false); }
SpMat assemble_full_stiffness(const FeSpace& space) { return assemble_full(space, true); }

// ---------------------------------------------------------------------------

struct Discretization::MassSolver {
  Eigen::SimplicialLLT<SpMat> llt;
};

Discretization::Discretization(SpacePtr space, PhysicsParams params)
    : space_(std::move(space)), params_(std::move(params)) {
  if (!space_) throw ConfigError("discretization without a space");
  params_.validate();
  scalar_ = std::make_unique<ScalarPattern>(*space_);
  block_ = std::make_unique<BlockPattern>(*scalar_);
  constants_ = assemble_constants(*space_, params_);

  const auto& c = constants_;
  mass_padded_ = block_->zero();
  h1_padded_ = block_->zero();
  linear_ = block_->zero();
  for (int p = 0; p < 4; ++p) {
    block_->add(mass_padded_, p, p, 1.0, c.mass);
    block_->add(h1_padded_, p, p, 1.0, c.mass);
    block_->add(h1_padded_, p, p, 1.0, c.stiffness);
  }
  const double half_delta = 0.5 * params_.delta;
  const double half_omega = 0.5 * params_.omega;
  const double k0 = params_.k0;
  for (int p : {0, 1}) {
    block_->add(linear_, p, p, 0.5, c.stiffness);
    block_->add(linear_, p, p, 1.0, c.potential[0]);
    block_->add(linear_, p, p, half_delta, c.mass);
  }
  for (int p : {2, 3}) {
    block_->add(linear_, p, p, 0.5, c.stiffness);
    block_->add(linear_, p, p, 1.0, c.potential[1]);
    block_->add(linear_, p, p, -half_delta, c.mass);
  }
  // k0 * [[0, -L], [L, 0]] on component 1, the negative on component 2.
  block_->add(linear_, kU1R, kU1I, -k0, c.derivative_x);
  block_->add(linear_, kU1I, kU1R, k0, c.derivative_x);
  block_->add(linear_, kU2R, kU2I, k0, c.derivative_x);
  block_->add(linear_, kU2I, kU2R, -k0, c.derivative_x);
  // Rabi coupling between the components.
  block_->add(linear_, kU1R, kU2R, half_omega, c.mass);
  block_->add(linear_, kU2R, kU1R, half_omega, c.mass);
  block_->add(linear_, kU1I, kU2I, half_omega, c.mass);
  block_->add(linear_, kU2I, kU1I, half_omega, c.mass);

  auto solver = std::make_shared<MassSolver>();
  solver->llt.compute(c.mass);
  if (solver->llt.info() != Eigen::Success) throw NumericalError("mass matrix is not positive definite");
  mass_solver_ = std::move(solver);
}

Vec Discretization::solve_mass(const Vec& b) const { return mass_solver_->llt.solve(b); }

// ---------------------------------------------------------------------------

WeightedOperators assemble_weighted(const Discretization& disc, const SpinorField& u) {
  const auto prod = weighted_values(disc, u, true);
  const auto& pat = disc.scalar_pattern();
  WeightedOperators w;
  for (int k = 0; k < 10; ++k) w.products[k] = pat.with_values(prod[k]);
  const auto dens = densities_from_products(prod);
  w.density[0] = pat.with_values(dens[0]);
  w.density[1] = pat.with_values(dens[1]);
  return w;
}

SpMat assemble_A(const Discretization& disc, const SpinorField& u) {
  check_space(disc, u);
  const double s = 1.0 / norm_sq(disc, u);
  return nonlinear_operator(disc, u, s, false);
}

JParts assemble_J_parts(const Discretization& disc, const SpinorField& u, double sigma) {
  check_space(disc, u);
  const auto& prm = disc.params();
  const double nsq = norm_sq(disc, u);
  const double s = 1.0 / nsq;
  std::vector<Vec> prod;
  JParts parts;
  parts.C = nonlinear_operator(disc, u, s, true, &prod);
  for (int p = 0; p < 4; ++p) disc.block_pattern().add(parts.C, p, p, -sigma, disc.constants().mass);

  const auto& pat = disc.scalar_pattern();
  const auto dens = densities_from_products(prod);
  const SpMat w1 = pat.with_values(prm.beta11 * dens[0] + prm.beta12 * dens[1]);
  const SpMat w2 = pat.with_values(prm.beta22 * dens[1] + prm.beta12 * dens[0]);
  const int n = disc.dofs();
  const double scale = -2.0 * s * s;
  parts.factors.U = Mat::Zero(4 * n, 2);
  parts.factors.U.col(0).segment(0 * n, n) = scale * (w1 * u.part(kU1R));
  parts.factors.U.col(0).segment(1 * n, n) = scale * (w1 * u.part(kU1I));
  parts.factors.U.col(1).segment(2 * n, n) = scale * (w2 * u.part(kU2R));
  parts.factors.U.col(1).segment(3 * n, n) = scale * (w2 * u.part(kU2I));
  const Vec mu = disc.mass_padded() * u.coeffs();
  parts.factors.V.resize(2, 4 * n);
  parts.factors.V.row(0) = mu.transpose();
  parts.factors.V.row(1) = mu.transpose();
  return parts;
}

Mat dense_J(const JParts& parts) { return Mat(parts.C) + parts.factors.U * parts.factors.V; }

SpMat assemble_Hessian(const Discretization& disc, const SpinorField& u) {
  check_space(disc, u);
  norm_sq(disc, u);
  return nonlinear_operator(disc, u, 1.0, true);
}

double interaction_integral(const Discretization& disc, const SpinorField& u) {
  check_space(disc, u);
  const FeSpace& space = disc.space();
  const auto& prm = disc.params();
  const Tabulation& t8 = exact_tabulation(space.order());
  const int lc = t8.lc;
  const double area = space.element_area();
  std::array<Vec, 4> nodal;
  for (int p = 0; p < 4; ++p) nodal[p] = space.expand(u.part(p));

  double total = 0.0;
  for (std::size_t e = 0; e < space.triangle_count(); ++e) {
    const auto tri = space.triangle(e);
    double elem = 0.0;
    for (std::size_t q = 0; q < t8.rule->size(); ++q) {
      const auto& phi = t8.phi[q];
      std::array<double, 4> val{};
      for (int p = 0; p < 4; ++p)
        for (int a = 0; a < lc; ++a) val[p] += phi[a] * nodal[p][tri[a]];
      const double d1 = val[0] * val[0] + val[1] * val[1];
      const double d2 = val[2] * val[2] + val[3] * val[3];
      elem += t8.rule->weights[q] *
              (0.5 * prm.beta11 * d1 * d1 + 0.5 * prm.beta22 * d2 * d2 + prm.beta12 * d1 * d2);
    }
    total += elem * area;
  }
  return total;
}

double integrate_pointwise(const Discretization& disc, std::span<const SpinorField* const> fields,
                           const PointwiseIntegrand& f) {
  const FeSpace& space = disc.space();
  for (const SpinorField* u : fields) check_space(disc, *u);
  const Tabulation& t8 = exact_tabulation(space.order());
  const int lc = t8.lc;
  const std::size_t nf = fields.size();
  std::vector<Vec> nodal;
  for (const SpinorField* u : fields)
    for (int p = 0; p < 4; ++p) nodal.push_back(space.expand(u->part(p)));

  std::vector<double> val(4 * nf);
  double total = 0.0;
  for (std::size_t e = 0; e < space.triangle_count(); ++e) {
    const auto tri = space.triangle(e);
    const Geometry geo(space, tri);
    double elem = 0.0;
    for (std::size_t q = 0; q < t8.rule->size(); ++q) {
      const auto& phi = t8.phi[q];
      for (std::size_t k = 0; k < val.size(); ++k) {
        double v = 0.0;
        for (int a = 0; a < lc; ++a) v += phi[a] * nodal[k][tri[a]];
        val[k] = v;
      }
      const Point x = geo.map(t8.rule->points[q][1], t8.rule->points[q][2]);
      elem += t8.rule->weights[q] * f(x, val);
    }
    total += elem * geo.area;
  }
  return total;
}

}  // namespace sogpe
