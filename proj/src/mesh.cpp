#include "sogpe/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sogpe/errors.hpp"

namespace sogpe {

namespace shape {

int local_count(int order) { return order == 1 ? 3 : 6; }

void values(int order, double xi, double eta, std::span<double> out) {
  const double l0 = 1.0 - xi - eta;
  const double l1 = xi;
  const double l2 = eta;
  if (order == 1) {
    out[0] = l0;
    out[1] = l1;
    out[2] = l2;
    return;
  }
  out[0] = l0 * (2.0 * l0 - 1.0);
  out[1] = l1 * (2.0 * l1 - 1.0);
  out[2] = l2 * (2.0 * l2 - 1.0);
  out[3] = 4.0 * l0 * l1;
  out[4] = 4.0 * l1 * l2;
  out[5] = 4.0 * l2 * l0;
}

void gradients(int order, double xi, double eta, std::span<std::array<double, 2>> out) {
  constexpr std::array<double, 2> g0{-1.0, -1.0};
  constexpr std::array<double, 2> g1{1.0, 0.0};
  constexpr std::array<double, 2> g2{0.0, 1.0};
  if (order == 1) {
    out[0] = g0;
    out[1] = g1;
    out[2] = g2;
    return;
  }
  const double l0 = 1.0 - xi - eta;
  const double l1 = xi;
  const double l2 = eta;
  auto scaled = [](const std::array<double, 2>& g, double s) {
    return std::array<double, 2>{g[0] * s, g[1] * s};
  };
  auto pair = [](const std::array<double, 2>& ga, double lb, const std::array<double, 2>& gb, double la) {
    return std::array<double, 2>{4.0 * (ga[0] * lb + gb[0] * la), 4.0 * (ga[1] * lb + gb[1] * la)};
  };
  out[0] = scaled(g0, 4.0 * l0 - 1.0);
  out[1] = scaled(g1, 4.0 * l1 - 1.0);
  out[2] = scaled(g2, 4.0 * l2 - 1.0);
  out[3] = pair(g0, l1, g1, l0);
  out[4] = pair(g1, l2, g2, l1);
  out[5] = pair(g2, l0, g0, l2);
}

}  // namespace shape

FeSpace::FeSpace(const RectDomain& domain, int order) : domain_(domain), order_(order) {
  const int n = domain.n_sub;
  const int g = grid_size();
  const double dx = (domain.xmax - domain.xmin) / (g - 1);
  const double dy = (domain.ymax - domain.ymin) / (g - 1);

  nodes_.reserve(static_cast<std::size_t>(g) * g);
  node_to_dof_.assign(static_cast<std::size_t>(g) * g, -1);
  for (int j = 0; j < g; ++j) {
    for (int i = 0; i < g; ++i) {
      // Snap the last row/column exactly onto the boundary.
      const double x = i == g - 1 ? domain.xmax : domain.xmin + i * dx;
      const double y = j == g - 1 ? domain.ymax : domain.ymin + j * dy;
      const int id = static_cast<int>(nodes_.size());
      nodes_.push_back({x, y});
      if (i > 0 && j > 0 && i < g - 1 && j < g - 1) {
        node_to_dof_[id] = static_cast<int>(dof_to_node_.size());
        dof_to_node_.push_back(id);
      }
    }
  }

  auto id = [g](int i, int j) { return j * g + i; };
  const int k = order;
  triangles_.reserve(static_cast<std::size_t>(2) * n * n * local_count());
  for (int cj = 0; cj < n; ++cj) {
    for (int ci = 0; ci < n; ++ci) {
      const int i0 = k * ci;
      const int j0 = k * cj;
      const int ll = id(i0, j0);
      const int lr = id(i0 + k, j0);
      const int ur = id(i0 + k, j0 + k);
      const int ul = id(i0, j0 + k);
      if (order == 1) {
        triangles_.insert(triangles_.end(), {ll, lr, ur});
        triangles_.insert(triangles_.end(), {ll, ur, ul});
      } else {
        // (LL, LR, UR): m01 bottom edge, m12 right edge, m20 diagonal.
        triangles_.insert(triangles_.end(),
                          {ll, lr, ur, id(i0 + 1, j0), id(i0 + 2, j0 + 1), id(i0 + 1, j0 + 1)});
        // (LL, UR, UL): m01 diagonal, m12 top edge, m20 left edge.
        triangles_.insert(triangles_.end(),
                          {ll, ur, ul, id(i0 + 1, j0 + 1), id(i0 + 1, j0 + 2), id(i0, j0 + 1)});
      }
    }
  }
}

double FeSpace::element_area() const {
  const double hx = (domain_.xmax - domain_.xmin) / domain_.n_sub;
  const double hy = (domain_.ymax - domain_.ymin) / domain_.n_sub;
  return 0.5 * hx * hy;
}

FeSpace::Location FeSpace::locate(const Point& p) const {
  const auto& d = domain_;
  const double tol = 1e-12 * std::max(d.xmax - d.xmin, d.ymax - d.ymin);
  if (!(p[0] >= d.xmin - tol && p[0] <= d.xmax + tol && p[1] >= d.ymin - tol && p[1] <= d.ymax + tol)) {
    throw std::out_of_range("point (" + std::to_string(p[0]) + ", " + std::to_string(p[1]) +
                            ") lies outside the domain");
  }
  const int n = d.n_sub;
  const double hx = (d.xmax - d.xmin) / n;
  const double hy = (d.ymax - d.ymin) / n;
  const double sx = (p[0] - d.xmin) / hx;
  const double sy = (p[1] - d.ymin) / hy;
  const int ci = std::clamp(static_cast<int>(std::floor(sx)), 0, n - 1);
  const int cj = std::clamp(static_cast<int>(std::floor(sy)), 0, n - 1);
  const double s = sx - ci;
  const double t = sy - cj;
  const std::size_t cell = static_cast<std::size_t>(cj) * n + ci;
  // Lower triangle (LL, LR, UR): x = LL + xi*(LR-LL) + eta*(UR-LL).
  if (t <= s) return {2 * cell, s - t, t};
  // Upper triangle (LL, UR, UL): x = LL + xi*(UR-LL) + eta*(UL-LL).
  return {2 * cell + 1, s, t - s};
}

Vec FeSpace::expand(const Vec& coeffs) const {
  if (coeffs.size() != dofs()) throw SpaceMismatch("coefficient vector does not match the space");
  Vec full = Vec::Zero(static_cast<Eigen::Index>(node_count()));
  for (int dof = 0; dof < dofs(); ++dof) full[dof_to_node_[dof]] = coeffs[dof];
  return full;
}

SpacePtr build_space(const RectDomain& domain, int order) {
  if (order != 1 && order != 2) throw ConfigError("element order must be 1 or 2");
  if (!(domain.xmax > domain.xmin) || !(domain.ymax > domain.ymin)) {
    throw ConfigError("degenerate rectangle");
  }
  if (domain.n_sub < 2) throw ConfigError("n_sub must be at least 2");
  return std::make_shared<const FeSpace>(domain, order);
}

Vec eval_at_points(const FeSpace& space, const Vec& coeffs, std::span<const Point> points) {
  const Vec full = space.expand(coeffs);
  Vec out(static_cast<Eigen::Index>(points.size()));
  std::array<double, 6> phi{};
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto loc = space.locate(points[k]);
    shape::values(space.order(), loc.xi, loc.eta, phi);
    const auto tri = space.triangle(loc.triangle);
    double v = 0.0;
    for (std::size_t a = 0; a < tri.size(); ++a) v += phi[a] * full[tri[a]];
    out[static_cast<Eigen::Index>(k)] = v;
  }
  return out;
}

Vec interpolate_p1_to_p2(const FeSpace& p1, const FeSpace& p2, const Vec& coeffs) {
  if (p1.order() != 1 || p2.order() != 2) throw SpaceMismatch("expected a P1 source and a P2 target");
  if (!(p1.domain() == p2.domain())) throw SpaceMismatch("P1 and P2 spaces live on different grids");
  const Vec coarse = p1.expand(coeffs);
  const int gc = p1.grid_size();
  const int gf = p2.grid_size();
  auto at = [&](int i, int j) { return coarse[j * gc + i]; };
  Vec out(p2.dofs());
  for (int dof = 0; dof < p2.dofs(); ++dof) {
    const int node = p2.dof_node(dof);
    const int i = node % gf;
    const int j = node / gf;
    const int i0 = i / 2;
    const int j0 = j / 2;
    const bool odd_i = i % 2 != 0;
    const bool odd_j = j % 2 != 0;
    if (!odd_i && !odd_j) {
      out[dof] = at(i0, j0);
    } else if (odd_i && !odd_j) {
      out[dof] = 0.5 * (at(i0, j0) + at(i0 + 1, j0));
    } else if (!odd_i && odd_j) {
      out[dof] = 0.5 * (at(i0, j0) + at(i0, j0 + 1));
    } else {
      // Midpoint of the LL-UR diagonal.
      out[dof] = 0.5 * (at(i0, j0) + at(i0 + 1, j0 + 1));
    }
  }
  return out;
}

}  // namespace sogpe
