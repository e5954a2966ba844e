#pragma once

#include <array>
#include <vector>

namespace sogpe {

/// Symmetric quadrature rule on a triangle. Points are barycentric
/// coordinates, weights sum to one (multiply by the element area).
struct TriangleRule {
  int degree;
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

/// Smallest built-in rule that integrates polynomials of `degree` exactly.
/// Available exactness: 2, 4 and 8.
const TriangleRule& triangle_rule(int degree);

}  // namespace sogpe
