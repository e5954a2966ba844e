#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "sogpe/state.hpp"

namespace sogpe {

struct SpectralOptions {
  /// Residual norm an eigenpair must reach before its spectrum is analysed.
  double converged_tol = 1e-7;
  /// Relative eigen-residual at which the subspace iterations stop.
  double eig_tol = 1e-10;
  int max_iters = 500;
  /// Extra basis vectors beyond the requested count.
  int oversampling = 4;
  /// Hessian shift below lambda, relative to |lambda|.
  double hessian_shift = 1e-3;
  unsigned seed = 12345;
};

struct SpectralReport {
  double lambda = 0.0;
  /// Smallest eigenvalues of the tangent-projected Hessian, ascending.
  std::vector<double> hessian_smallest;
  std::optional<double> sigma;
  /// Eigenvalue of the J-operator nearest sigma outside span{u, iu}.
  std::optional<std::complex<double>> mu0;
  /// |lambda - sigma| / |mu0 - sigma|.
  std::optional<double> predicted_rate;
  /// max |J v - lambda M v| / |lambda M v| over v in {u, iu}.
  std::optional<double> deflation_residual;
  std::vector<std::string> warnings;
};

/// k smallest eigenvalues of H v = mu M v on the M-orthogonal complement of u,
/// by shift-invert block subspace iteration with the bordered system
/// [H - s M, M u; (M u)^T, 0]. Throws NumericalError when u is not converged
/// or the iteration stagnates.
std::vector<double> projected_hessian_eigs(const Discretization& disc, const Eigenpair& pair, int k,
                                           const SpectralOptions& opts = {});

struct JGap {
  std::complex<double> mu0;
  double predicted_rate = 0.0;
  double deflation_residual = 0.0;
  /// M inner products of the mu0 Schur vector with u and iu.
  double deflated_overlap = 0.0;
  std::vector<std::string> warnings;
};

/// Eigenvalue of J v = mu M v nearest sigma after deflating span{u, iu}, by
/// subspace iteration on (J - sigma M)^{-1} M with Schur deflation.
JGap j_gap(const Discretization& disc, const Eigenpair& pair, double sigma, const SpectralOptions& opts = {});

/// Hessian eigenvalues and, when sigma is given, the J-gap.
SpectralReport spectral_report(const Discretization& disc, const Eigenpair& pair, int k,
                               std::optional<double> sigma, const SpectralOptions& opts = {});

}  // namespace sogpe
