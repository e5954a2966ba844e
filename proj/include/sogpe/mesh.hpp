#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace sogpe {

using Vec = Eigen::VectorXd;
using Point = std::array<double, 2>;

/// Axis-aligned rectangle with a uniform n_sub x n_sub cell grid.
struct RectDomain {
  double xmin = -1.0;
  double xmax = 1.0;
  double ymin = -1.0;
  double ymax = 1.0;
  int n_sub = 256;

  double area() const { return (xmax - xmin) * (ymax - ymin); }
  bool operator==(const RectDomain&) const = default;
};

/// Lagrange shape functions on the reference triangle (0,0),(1,0),(0,1).
/// Local node order: three vertices, then edge midpoints m01, m12, m20.
namespace shape {
int local_count(int order);
void values(int order, double xi, double eta, std::span<double> out);
/// Reference gradients, out[i] = (d/dxi, d/deta).
void gradients(int order, double xi, double eta, std::span<std::array<double, 2>> out);
}  // namespace shape

/// Uniform triangulation of a RectDomain with P1 or P2 Lagrange elements and
/// homogeneous Dirichlet conditions. Immutable once built.
///
/// Nodes are numbered row-major by (y, x) on the (k*n_sub+1)^2 Lagrange grid,
/// k = order. Every cell is split along its lower-left to upper-right diagonal
/// into (LL, LR, UR) and (LL, UR, UL). Interior nodes get DOF indices in node
/// order; boundary nodes carry dof -1.
class FeSpace {
 public:
  FeSpace(const RectDomain& domain, int order);

  const RectDomain& domain() const { return domain_; }
  int order() const { return order_; }
  int dofs() const { return static_cast<int>(dof_to_node_.size()); }
  int local_count() const { return order_ == 1 ? 3 : 6; }
  int grid_size() const { return order_ * domain_.n_sub + 1; }

  std::size_t node_count() const { return nodes_.size(); }
  const std::vector<Point>& nodes() const { return nodes_; }
  std::size_t triangle_count() const { return triangles_.size() / local_count(); }
  std::span<const int> triangle(std::size_t t) const {
    return {triangles_.data() + t * local_count(), static_cast<std::size_t>(local_count())};
  }
  int node_dof(int node) const { return node_to_dof_[node]; }
  int dof_node(int dof) const { return dof_to_node_[dof]; }

  /// Twice the (signed) area is the same for every element of a uniform grid.
  double element_area() const;

  /// Returns the triangle containing p and the reference coordinates of p in it.
  struct Location {
    std::size_t triangle;
    double xi;
    double eta;
  };
  Location locate(const Point& p) const;

  /// Nodal values (all nodes, boundary = 0) of an interior coefficient vector.
  Vec expand(const Vec& coeffs) const;

 private:
  RectDomain domain_;
  int order_;
  std::vector<Point> nodes_;
  std::vector<int> triangles_;
  std::vector<int> node_to_dof_;
  std::vector<int> dof_to_node_;
};

using SpacePtr = std::shared_ptr<const FeSpace>;

/// Validates the inputs and builds the space.
SpacePtr build_space(const RectDomain& domain, int order);

/// Finite-element evaluation of an interior coefficient vector at points.
Vec eval_at_points(const FeSpace& space, const Vec& coeffs, std::span<const Point> points);

/// Nodal interpolation of a P1 function into the P2 space on the same grid.
Vec interpolate_p1_to_p2(const FeSpace& p1, const FeSpace& p2, const Vec& coeffs);

/// Interior-DOF vector of nodal samples of f.
template <class F>
Vec interpolate(const FeSpace& space, F&& f) {
  Vec out(space.dofs());
  for (int d = 0; d < space.dofs(); ++d) {
    const Point& p = space.nodes()[space.dof_node(d)];
    out[d] = f(p[0], p[1]);
  }
  return out;
}

}  // namespace sogpe
