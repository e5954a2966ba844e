#include "sogpe/linsolve.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <string>
#include <tuple>

#include <Eigen/CholmodSupport>
#include <umfpack.h>

#include "sogpe/errors.hpp"

namespace sogpe {

namespace {

using Complex = std::complex<double>;
using CSpMat = Eigen::SparseMatrix<Complex>;

double inf_norm(const SpMat& a) {
  Vec rows = Vec::Zero(a.rows());
  for (Eigen::Index c = 0; c < a.outerSize(); ++c)
    for (SpMat::InnerIterator it(a, c); it; ++it) rows[it.row()] += std::abs(it.value());
  return a.rows() > 0 ? rows.maxCoeff() : 0.0;
}

double one_norm(const SpMat& a) {
  double best = 0.0;
  for (Eigen::Index c = 0; c < a.outerSize(); ++c) {
    double col = 0.0;
    for (SpMat::InnerIterator it(a, c); it; ++it) col += std::abs(it.value());
    best = std::max(best, col);
  }
  return best;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

bool same_pattern(const SpMat& a, const SpMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.nonZeros() != b.nonZeros()) return false;
  const auto n = a.outerSize();
  return std::equal(a.outerIndexPtr(), a.outerIndexPtr() + n + 1, b.outerIndexPtr()) &&
         std::equal(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros(), b.innerIndexPtr());
}

template <class Solver>
void use_nested_dissection(Solver& s) {
  s.cholmod().nmethods = 1;
  s.cholmod().method[0].ordering = CHOLMOD_METIS;
}

/// Maps the real form of a complex matrix onto its complex entries.
struct ComplexForm {
  int components = 0;
  Eigen::Index block = 0;
  CSpMat pattern;
  // Positions in the real value array feeding complex entry k, or -1:
  // (R,R) and (I,I) give the real part, (I,R) and -(R,I) the imaginary part.
  std::vector<int> rr, ii, ir, ri;

  ComplexForm(const SpMat& a, int comps) : components(comps) {
    if (comps < 1 || a.rows() % (2 * comps) != 0) {
      throw SpaceMismatch("matrix size is not a multiple of the complex block layout");
    }
    block = a.rows() / (2 * comps);
    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(static_cast<std::size_t>(a.nonZeros()) / 2);
    for (Eigen::Index c = 0; c < a.outerSize(); ++c)
      for (SpMat::InnerIterator it(a, c); it; ++it) {
        const auto [row, col, part] = locate(it.row(), it.col());
        (void)part;
        trip.emplace_back(row, col, Complex(1.0));
      }
    const Eigen::Index nc = components * block;
    pattern.resize(nc, nc);
    pattern.setFromTriplets(trip.begin(), trip.end());
    pattern.makeCompressed();
    const auto nnz = static_cast<std::size_t>(pattern.nonZeros());
    rr.assign(nnz, -1);
    ii.assign(nnz, -1);
    ir.assign(nnz, -1);
    ri.assign(nnz, -1);
    const std::array<std::vector<int>*, 4> slot{&rr, &ii, &ir, &ri};
    for (Eigen::Index c = 0; c < a.outerSize(); ++c) {
      for (Eigen::Index p = a.outerIndexPtr()[c]; p < a.outerIndexPtr()[c + 1]; ++p) {
        const auto [row, col, part] = locate(a.innerIndexPtr()[p], c);
        const int* begin = pattern.innerIndexPtr() + pattern.outerIndexPtr()[col];
        const int* end = pattern.innerIndexPtr() + pattern.outerIndexPtr()[col + 1];
        const auto k = static_cast<std::size_t>(std::lower_bound(begin, end, row) - pattern.innerIndexPtr());
        (*slot[part])[k] = static_cast<int>(p);
      }
    }
  }

  /// Complex (row, col) of a real entry and its block kind: 0 RR, 1 II, 2 IR, 3 RI.
  std::tuple<Eigen::Index, Eigen::Index, int> locate(Eigen::Index r, Eigen::Index c) const {
    const Eigen::Index br = r / block, bc = c / block;
    const Eigen::Index row = (br / 2) * block + r % block;
    const Eigen::Index col = (bc / 2) * block + c % block;
    const bool r_imag = br % 2 == 1, c_imag = bc % 2 == 1;
    const int part = !r_imag && !c_imag ? 0 : (r_imag && c_imag ? 1 : (r_imag ? 2 : 3));
    return {row, col, part};
  }

  /// Copies the values of `a` (same pattern as at construction) into `pattern`.
  void gather(const SpMat& a) {
    const double* v = a.valuePtr();
    const auto at = [v](int p) { return p < 0 ? 0.0 : v[p]; };
    Complex* out = pattern.valuePtr();
    for (std::size_t k = 0; k < rr.size(); ++k) {
      const double re = at(rr[k]);
      const double im = at(ir[k]);
      if (at(ii[k]) != re || -at(ri[k]) != im) {
        throw NumericalError("matrix is not the real form of a complex matrix");
      }
      out[k] = Complex(re, im);
    }
  }

  Eigen::VectorXcd to_complex(const Vec& x) const {
    Eigen::VectorXcd z(components * block);
    for (int c = 0; c < components; ++c)
      for (Eigen::Index i = 0; i < block; ++i) {
        z[c * block + i] = Complex(x[(2 * c) * block + i], x[(2 * c + 1) * block + i]);
      }
    return z;
  }

  Vec to_real(const Eigen::VectorXcd& z) const {
    Vec x(2 * components * block);
    for (int c = 0; c < components; ++c)
      for (Eigen::Index i = 0; i < block; ++i) {
        x[(2 * c) * block + i] = z[c * block + i].real();
        x[(2 * c + 1) * block + i] = z[c * block + i].imag();
      }
    return x;
  }
};

}  // namespace

struct Factorization::Impl {
  Method method;
  int components;
  SpMat matrix;
  double matrix_norm = 0.0;
  double pivot_ratio = std::numeric_limits<double>::quiet_NaN();
  mutable double last_residual = 0.0;

  // LU
  void* symbolic = nullptr;
  void* numeric = nullptr;
  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];

  // Cholesky
  std::unique_ptr<Eigen::CholmodSupernodalLLT<SpMat, Eigen::Lower>> llt;

  // Hermitian Cholesky
  std::unique_ptr<ComplexForm> complex_form;
  std::unique_ptr<Eigen::CholmodSupernodalLLT<CSpMat, Eigen::Lower>> cllt;

  Impl(Method m, int comps) : method(m), components(comps) {
    umfpack_di_defaults(control);
    control[UMFPACK_ORDERING] = UMFPACK_ORDERING_METIS;
  }
  ~Impl() { release(); }

  void release_numeric() {
    if (numeric) umfpack_di_free_numeric(&numeric);
    numeric = nullptr;
  }
  void release() {
    release_numeric();
    if (symbolic) umfpack_di_free_symbolic(&symbolic);
    symbolic = nullptr;
  }

  void factor(const SpMat& a) {
    if (a.rows() != a.cols()) throw SpaceMismatch("factorization needs a square matrix");
    const bool reuse = matrix.rows() > 0 && same_pattern(matrix, a);
    matrix = a;
    matrix.makeCompressed();
    matrix_norm = inf_norm(matrix);
    switch (method) {
      case Method::Lu: factor_lu(reuse); break;
      case Method::Cholesky: factor_cholesky(reuse); break;
      case Method::HermitianCholesky: factor_hermitian(reuse); break;
    }
  }

  void factor_lu(bool reuse) {
    const int n = static_cast<int>(matrix.rows());
    if (!reuse) {
      release();
      const int status = umfpack_di_symbolic(n, n, matrix.outerIndexPtr(), matrix.innerIndexPtr(),
                                             matrix.valuePtr(), &symbolic, control, info);
      if (status != UMFPACK_OK) {
        throw NumericalError("symbolic LU analysis failed (UMFPACK status " + std::to_string(status) + ")");
      }
    }
    release_numeric();
    const int status = umfpack_di_numeric(matrix.outerIndexPtr(), matrix.innerIndexPtr(), matrix.valuePtr(),
                                          symbolic, &numeric, control, info);
    pivot_ratio = status == UMFPACK_WARNING_singular_matrix ? 0.0 : info[UMFPACK_RCOND];
    if (status != UMFPACK_OK && status != UMFPACK_WARNING_singular_matrix) {
      release_numeric();
      throw NumericalError("LU factorization failed (UMFPACK status " + std::to_string(status) + ")");
    }
    if (!(pivot_ratio >= kPivotTolerance)) {
      release_numeric();
      throw SingularMatrix("matrix is singular to working precision (pivot ratio " + sci(pivot_ratio) + ")",
                           pivot_ratio);
    }
    // The pivot ratio misses most numerically singular matrices: rounding
    // leaves the smallest pivot far above eps |A|.
    const double rcond = 1.0 / (one_norm(matrix) * inverse_one_norm());
    if (!(rcond >= kConditionTolerance)) {
      release_numeric();
      throw SingularMatrix("matrix is singular to working precision (reciprocal condition estimate " +
                               sci(rcond) + ")",
                           pivot_ratio);
    }
  }

  Vec lu_solve(int sys, const Vec& b) const {
    Vec x(b.size());
    double local_info[UMFPACK_INFO];
    const int status = umfpack_di_solve(sys, matrix.outerIndexPtr(), matrix.innerIndexPtr(), matrix.valuePtr(),
                                        x.data(), b.data(), numeric, control, local_info);
    if (status != UMFPACK_OK) {
      throw NumericalError("LU solve failed (UMFPACK status " + std::to_string(status) + ")");
    }
    return x;
  }

  // Hager-Higham lower bound on |A^{-1}|_1 (the LAPACK xLACON iteration).
  double inverse_one_norm() const {
    const Eigen::Index n = matrix.rows();
    Vec x = Vec::Constant(n, 1.0 / static_cast<double>(n));
    double est = 0.0;
    for (int it = 0; it < 5; ++it) {
      const Vec y = lu_solve(UMFPACK_A, x);
      const double next = y.lpNorm<1>();
      if (!std::isfinite(next)) return std::numeric_limits<double>::infinity();
      if (it > 0 && next <= est) break;
      est = next;
      const Vec xi = y.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
      const Vec z = lu_solve(UMFPACK_At, xi);
      Eigen::Index j = 0;
      const double zmax = z.cwiseAbs().maxCoeff(&j);
      if (it > 0 && zmax <= z.dot(x)) break;
      x.setZero();
      x[j] = 1.0;
    }
    Vec alt(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      alt[i] = (i % 2 ? -1.0 : 1.0) * (1.0 + static_cast<double>(i) / static_cast<double>(std::max<Eigen::Index>(n - 1, 1)));
    }
    const double alt_est = 2.0 * lu_solve(UMFPACK_A, alt).lpNorm<1>() / (3.0 * static_cast<double>(n));
    return std::max(est, alt_est);
  }

  void factor_cholesky(bool reuse) {
    if (!reuse || !llt) {
      llt = std::make_unique<Eigen::CholmodSupernodalLLT<SpMat, Eigen::Lower>>();
      use_nested_dissection(*llt);
      llt->analyzePattern(matrix);
    }
    llt->factorize(matrix);
    if (llt->info() != Eigen::Success) throw SingularMatrix("matrix is not positive definite", 0.0);
  }

  void factor_hermitian(bool reuse) {
    if (!reuse || !cllt) {
      complex_form = std::make_unique<ComplexForm>(matrix, components);
      complex_form->gather(matrix);
      cllt = std::make_unique<Eigen::CholmodSupernodalLLT<CSpMat, Eigen::Lower>>();
      use_nested_dissection(*cllt);
      cllt->analyzePattern(complex_form->pattern);
    } else {
      complex_form->gather(matrix);
    }
    cllt->factorize(complex_form->pattern);
    if (cllt->info() != Eigen::Success) throw SingularMatrix("matrix is not positive definite", 0.0);
  }

  Vec raw_solve(const Vec& b) const {
    switch (method) {
      case Method::Lu:
        return lu_solve(UMFPACK_A, b);
      case Method::Cholesky:
        return llt->solve(b);
      case Method::HermitianCholesky: {
        const Eigen::VectorXcd z = cllt->solve(complex_form->to_complex(b));
        return complex_form->to_real(z);
      }
    }
    return {};
  }

  Vec checked_solve(const Vec& b) const {
    if (b.size() != matrix.rows()) throw SpaceMismatch("right-hand side has the wrong length");
    Vec x = raw_solve(b);
    const Vec r = matrix * x - b;
    const double rn = r.lpNorm<Eigen::Infinity>();
    const double bn = b.lpNorm<Eigen::Infinity>();
    const double bound = kResidualTolerance * (matrix_norm * x.lpNorm<Eigen::Infinity>() + bn);
    if (!x.allFinite() || rn > bound) {
      throw NumericalError("direct solve failed its residual check (|r| = " + std::to_string(rn) + ")");
    }
    const double rel = bn > 0.0 ? r.norm() / b.norm() : r.norm();
    last_residual = std::max(last_residual, rel);
    return x;
  }
};

Factorization::Factorization(const SpMat& a, Method method, int components)
    : impl_(std::make_unique<Impl>(method, components)) {
  impl_->factor(a);
}

Factorization::~Factorization() = default;
Factorization::Factorization(Factorization&&) noexcept = default;
Factorization& Factorization::operator=(Factorization&&) noexcept = default;

void Factorization::refactor(const SpMat& a) { impl_->factor(a); }

Vec Factorization::solve(const Vec& b) const {
  impl_->last_residual = 0.0;
  return impl_->checked_solve(b);
}

Mat Factorization::solve_many(const Mat& b) const {
  if (b.rows() != impl_->matrix.rows()) throw SpaceMismatch("right-hand sides have the wrong length");
  impl_->last_residual = 0.0;
  Mat x(b.rows(), b.cols());
  for (Eigen::Index c = 0; c < b.cols(); ++c) x.col(c) = impl_->checked_solve(b.col(c));
  return x;
}

Factorization::Method Factorization::method() const { return impl_->method; }
Eigen::Index Factorization::size() const { return impl_->matrix.rows(); }
double Factorization::pivot_ratio() const { return impl_->pivot_ratio; }
double Factorization::last_relative_residual() const { return impl_->last_residual; }

Factorization factorize(const SpMat& a) { return Factorization(a, Factorization::Method::Lu); }

Mat solve_many(const Factorization& f, const Mat& b) { return f.solve_many(b); }

}  // namespace sogpe
