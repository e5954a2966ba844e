#pragma once

#include <memory>

#include "sogpe/assembly.hpp"

namespace sogpe {

/// Reusable direct factorization of a sparse square matrix.
///
/// The LU path (UMFPACK, nested-dissection ordering, row scaling, iterative
/// refinement) handles general nonsymmetric matrices. It rejects pivots with
/// min|U_ii| / max|U_ii| below kPivotTolerance and matrices whose estimated
/// reciprocal 1-norm condition number is below kConditionTolerance. The Cholesky path (CHOLMOD
/// supernodal) is for symmetric positive definite matrices and reads only the
/// lower triangle.
///
/// HermitianCholesky takes the real form of a complex Hermitian positive
/// definite matrix: `components` pairs of equal-sized (real, imaginary) blocks,
/// with block (cR, dR) = block (cI, dI) = Re H_cd and block (cI, dR) =
/// -block (cR, dI) = Im H_cd. It factorizes H in complex arithmetic, which
/// halves the work of the real Cholesky. The structure is checked exactly.
///
/// Every solve checks the normwise backward error
///   |A x - b|_inf <= kResidualTolerance * (|A|_inf |x|_inf + |b|_inf)
/// and throws NumericalError when it does not hold. A Factorization may be
/// used by one thread at a time.
class Factorization {
 public:
  enum class Method { Lu, Cholesky, HermitianCholesky };

  static constexpr double kPivotTolerance = 1e-14;
  static constexpr double kConditionTolerance = 1e-14;
  static constexpr double kResidualTolerance = 1e-10;

  explicit Factorization(const SpMat& a, Method method = Method::Lu, int components = 2);
  ~Factorization();
  Factorization(Factorization&&) noexcept;
  Factorization& operator=(Factorization&&) noexcept;
  Factorization(const Factorization&) = delete;
  Factorization& operator=(const Factorization&) = delete;

  /// Numeric refactorization; the symbolic analysis is reused when the
  /// sparsity pattern is unchanged.
  void refactor(const SpMat& a);

  Vec solve(const Vec& b) const;
  Mat solve_many(const Mat& b) const;

  Method method() const;
  Eigen::Index size() const;
  /// min|U_ii| / max|U_ii| of the last LU factorization (NaN for Cholesky).
  double pivot_ratio() const;
  /// Largest |A x - b| / |b| over the columns of the last solve.
  double last_relative_residual() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// LU factorization; throws SingularMatrix carrying the pivot ratio.
Factorization factorize(const SpMat& a);

/// Solves every column of b.
Mat solve_many(const Factorization& f, const Mat& b);

}  // namespace sogpe
