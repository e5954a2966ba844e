#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <span>

#include <Eigen/SparseCore>

#include "sogpe/mesh.hpp"
#include "sogpe/spinor.hpp"

namespace sogpe {

using SpMat = Eigen::SparseMatrix<double>;
using Mat = Eigen::MatrixXd;

/// Scalar field sampled at quadrature points, f(x, y).
using ScalarField = std::function<double(double, double)>;

struct PhysicsParams {
  double delta = 0.0;
  double omega = 0.0;
  double k0 = 0.0;
  double beta11 = 0.0;
  double beta12 = 0.0;
  double beta22 = 0.0;
  /// Adds (|delta| + |omega| + 2 k0^2) / 2 to both trapping potentials.
  bool potential_shift_enabled = false;
  /// Optional trap per component inside the domain (zero when empty).
  std::array<ScalarField, 2> extra_potential{};

  double potential_shift() const;
  /// Throws ConfigError on negative interaction strengths or non-finite values.
  void validate() const;
};

/// Interior N x N matrices that do not depend on the state.
struct ConstantOperators {
  SpMat stiffness;  // S
  SpMat mass;       // M
  std::array<SpMat, 2> potential;  // P1, P2
  SpMat derivative_x;  // L_ij = int phi_i d/dx phi_j
};

/// Mass matrices weighted by products of the state's real/imaginary parts,
/// all evaluated at quadrature points. `product(a, b)` is the matrix of
/// int u_a u_b phi_i phi_j with a, b in Part order.
struct WeightedOperators {
  std::array<SpMat, 2> density;  // M_{|u1|^2}, M_{|u2|^2}
  std::array<SpMat, 10> products;

  const SpMat& product(int a, int b) const;
  static int product_index(int a, int b);
};

/// Rank-two representation U V of the I2 term: U is 4N x 2, V is 2 x 4N.
struct RankTwoFactors {
  Mat U;
  Mat V;
};

struct JParts {
  SpMat C;
  RankTwoFactors factors;
};

/// Sparsity shared by every interior N x N matrix, plus the element scatter map.
class ScalarPattern {
 public:
  explicit ScalarPattern(const FeSpace& space);

  const SpMat& pattern() const { return pattern_; }
  Eigen::Index nnz() const { return pattern_.nonZeros(); }
  /// Position in the value array of local entry (a, b) of element t, or -1.
  int scatter(std::size_t t, int a, int b) const { return scatter_[(t * lc_ + a) * lc_ + b]; }
  SpMat with_values(const Vec& values) const;

 private:
  SpMat pattern_;
  int lc_;
  std::vector<int> scatter_;
};

/// 4N x 4N pattern in which each of the 16 blocks carries the scalar pattern.
class BlockPattern {
 public:
  explicit BlockPattern(const ScalarPattern& scalar);

  SpMat zero() const { return pattern_; }
  /// m(block a, block b) += coef * scalar, where scalar is on the scalar pattern.
  void add(SpMat& m, int a, int b, double coef, const Vec& scalar_values) const;
  void add(SpMat& m, int a, int b, double coef, const SpMat& scalar) const;

 private:
  SpMat pattern_;
  std::array<std::vector<int>, 16> position_;
};

/// Everything needed to evaluate operators on one space with one parameter
/// set. Constant data is assembled once; the object is immutable afterwards.
class Discretization {
 public:
  Discretization(SpacePtr space, PhysicsParams params);

  const FeSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  const PhysicsParams& params() const { return params_; }
  int dofs() const { return space_->dofs(); }

  const ConstantOperators& constants() const { return constants_; }
  const ScalarPattern& scalar_pattern() const { return *scalar_; }
  const BlockPattern& block_pattern() const { return *block_; }

  /// blockdiag(M, M, M, M).
  const SpMat& mass_padded() const { return mass_padded_; }
  /// blockdiag(S + M, ...), the H1 inner product.
  const SpMat& h1_padded() const { return h1_padded_; }
  /// The state-independent part of A (kinetic, trap, spin and k0 blocks).
  const SpMat& linear_operator() const { return linear_; }

  /// Solves M x = b for an N-vector (scalar mass matrix).
  Vec solve_mass(const Vec& b) const;

  double mass(const Vec& coeffs) const { return coeffs.dot(mass_padded_ * coeffs); }

 private:
  SpacePtr space_;
  PhysicsParams params_;
  std::unique_ptr<ScalarPattern> scalar_;
  std::unique_ptr<BlockPattern> block_;
  ConstantOperators constants_;
  SpMat mass_padded_;
  SpMat h1_padded_;
  SpMat linear_;
  struct MassSolver;
  std::shared_ptr<const MassSolver> mass_solver_;
};

ConstantOperators assemble_constants(const FeSpace& space, const PhysicsParams& params);

/// Mass and stiffness over all nodes (boundary included), for diagnostics.
SpMat assemble_full_mass(const FeSpace& space);
SpMat assemble_full_stiffness(const FeSpace& space);

WeightedOperators assemble_weighted(const Discretization& disc, const SpinorField& u);

/// Real 4N x 4N matrix of <A(u) v, w>, scaling invariant in u.
SpMat assemble_A(const Discretization& disc, const SpinorField& u);

/// C = A + I1 - sigma M_padded and the rank-two factors of I2.
JParts assemble_J_parts(const Discretization& disc, const SpinorField& u, double sigma);

/// Dense J(u) - sigma M = C + U V; only for small problems and diagnostics.
Mat dense_J(const JParts& parts);

/// int (beta11/2)|u1|^4 + (beta22/2)|u2|^4 + beta12 |u1|^2 |u2|^2, exact for P2.
double interaction_integral(const Discretization& disc, const SpinorField& u);

/// Receives a quadrature point and the values of the four parts of every field
/// there (field-major, Part order).
using PointwiseIntegrand = std::function<double(const Point&, std::span<const double>)>;

/// Integral of f over the domain with the degree-8 rule on every element.
double integrate_pointwise(const Discretization& disc, std::span<const SpinorField* const> fields,
                           const PointwiseIntegrand& f);

/// Second derivative of E at u (symmetric).
SpMat assemble_Hessian(const Discretization& disc, const SpinorField& u);

}  // namespace sogpe
