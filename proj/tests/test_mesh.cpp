#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fem_oracle.hpp"
#include "fixtures.hpp"
#include "sogpe/errors.hpp"
#include "sogpe/mesh.hpp"

namespace {

using sogpe::build_space;
using sogpe::Point;
using sogpe::Vec;

int dof_formula(int n, int order) {
  return order == 1 ? (n + 1) * (n + 1) - 4 * n : (2 * n + 1) * (2 * n + 1) - 8 * n;
}

// Interior lattice points of the order-k Lagrange grid, counted directly.
int brute_interior(int n, int order) {
  const int g = order * n + 1;
  int count = 0;
  for (int j = 0; j < g; ++j)
    for (int i = 0; i < g; ++i) count += (i > 0 && j > 0 && i < g - 1 && j < g - 1) ? 1 : 0;
  return count;
}

std::vector<Point> random_points(std::mt19937& gen, int count) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<Point> out;
  for (int k = 0; k < count; ++k) out.push_back({dist(gen), dist(gen)});
  return out;
}

TEST(Mesh, DofCountFormulaHoldsForAllSmallMeshes) {
  for (int n = 2; n <= 32; ++n) {
    for (int order : {1, 2}) {
      const auto space = build_space(fixtures::square(n), order);
      EXPECT_EQ(space->dofs(), dof_formula(n, order)) << "n_sub " << n << " order " << order;
      EXPECT_EQ(space->dofs(), brute_interior(n, order));
      EXPECT_EQ(static_cast<int>(space->node_count()), (order * n + 1) * (order * n + 1));
      EXPECT_EQ(static_cast<int>(space->triangle_count()), 2 * n * n);
    }
  }
}

TEST(Mesh, PaperResolutionHas261121Dofs) {
  EXPECT_EQ(build_space(fixtures::square(256), 2)->dofs(), 261121);
}

TEST(Mesh, SmallestMeshHasOneDof) { EXPECT_EQ(build_space(fixtures::square(2), 1)->dofs(), 1); }

TEST(Mesh, FourByFourQuadraticHas49Dofs) {
  EXPECT_EQ(build_space(fixtures::square(4), 2)->dofs(), 49);
  EXPECT_EQ(brute_interior(4, 2), 49);
}

TEST(Mesh, BoundaryNodesCarryNoDof) {
  for (int order : {1, 2}) {
    const auto space = build_space(fixtures::square(6), order);
    int interior = 0;
    for (std::size_t k = 0; k < space->node_count(); ++k) {
      const Point& p = space->nodes()[k];
      const bool boundary = std::abs(std::abs(p[0]) - 1.0) < 1e-14 || std::abs(std::abs(p[1]) - 1.0) < 1e-14;
      const int dof = space->node_dof(static_cast<int>(k));
      EXPECT_EQ(dof < 0, boundary);
      if (dof >= 0) {
        EXPECT_EQ(space->dof_node(dof), static_cast<int>(k));
        ++interior;
      }
    }
    EXPECT_EQ(interior, space->dofs());
  }
}

TEST(Mesh, NodesAreRowMajor) {
  const auto space = build_space(fixtures::square(3), 2);
  const int g = space->grid_size();
  for (int j = 0; j < g; ++j) {
    for (int i = 0; i < g; ++i) {
      const Point& p = space->nodes()[j * g + i];
      EXPECT_NEAR(p[0], -1.0 + 2.0 * i / (g - 1), 1e-15);
      EXPECT_NEAR(p[1], -1.0 + 2.0 * j / (g - 1), 1e-15);
    }
  }
}

TEST(Mesh, InvalidInputsAreRejected) {
  EXPECT_THROW(build_space(fixtures::square(4), 3), sogpe::ConfigError);
  EXPECT_THROW(build_space(fixtures::square(1), 1), sogpe::ConfigError);
  sogpe::RectDomain flat = fixtures::square(4);
  flat.ymax = flat.ymin;
  EXPECT_THROW(build_space(flat, 1), sogpe::ConfigError);
}

TEST(Mesh, PartitionOfUnity) {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int order : {1, 2}) {
    std::array<double, 6> phi{};
    for (int k = 0; k < 1000; ++k) {
      double xi = dist(gen), eta = dist(gen);
      if (xi + eta > 1.0) {
        xi = 1.0 - xi;
        eta = 1.0 - eta;
      }
      sogpe::shape::values(order, xi, eta, phi);
      double sum = 0.0;
      for (int a = 0; a < sogpe::shape::local_count(order); ++a) sum += phi[a];
      EXPECT_NEAR(sum, 1.0, 1e-13);
    }
  }
}

TEST(Mesh, EvaluatesLinearFieldAtNode) {
  for (int order : {1, 2}) {
    const auto space = build_space(fixtures::square(4), order);
    const Vec c = sogpe::interpolate(*space, [](double x, double) { return x; });
    const std::vector<Point> pts{{0.5, 0.0}};
    EXPECT_NEAR(sogpe::eval_at_points(*space, c, pts)[0], 0.5, 1e-15);
  }
}

TEST(Mesh, ZeroCoefficientsEvaluateToZero) {
  std::mt19937 gen(3);
  const auto space = build_space(fixtures::square(5), 2);
  const std::vector<Point> pts = random_points(gen, 50);
  EXPECT_EQ(sogpe::eval_at_points(*space, Vec::Zero(space->dofs()), pts).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Mesh, EvaluationMatchesIndependentShapeTable) {
  std::mt19937 gen(11);
  for (int order : {1, 2}) {
    const auto space = build_space(fixtures::square(6), order);
    const Vec c = fixtures::random_vec(space->dofs(), gen);
    for (const oracle::Element& e : oracle::elements(*space)) {
      const std::array<double, 3> l{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
      const Point centroid{(e.v[0][0] + e.v[1][0] + e.v[2][0]) / 3.0, (e.v[0][1] + e.v[1][1] + e.v[2][1]) / 3.0};
      const oracle::LocalBasis b = oracle::lagrange_basis(order, e.v, l);
      double expected = 0.0;
      for (std::size_t a = 0; a < e.dof.size(); ++a)
        if (e.dof[a] >= 0) expected += c[e.dof[a]] * b.phi[a];
      const std::vector<Point> pts{centroid};
      EXPECT_NEAR(sogpe::eval_at_points(*space, c, pts)[0], expected, 1e-14);
    }
  }
}

TEST(Mesh, EvaluationOutsideDomainThrows) {
  const auto space = build_space(fixtures::square(4), 1);
  const std::vector<Point> pts{{1.5, 0.0}};
  EXPECT_THROW(sogpe::eval_at_points(*space, Vec::Zero(space->dofs()), pts), std::out_of_range);
}

TEST(Mesh, P1ToP2ReproducesInteriorLinearField) {
  const auto p1 = build_space(fixtures::square(4), 1);
  const auto p2 = build_space(fixtures::square(4), 2);
  const Vec c1 = sogpe::interpolate(*p1, [](double x, double) { return x; });
  const Vec c2 = sogpe::interpolate_p1_to_p2(*p1, *p2, c1);
  for (int d = 0; d < p2->dofs(); ++d) {
    const Point& p = p2->nodes()[p2->dof_node(d)];
    // Away from the boundary layer the P1 field is exactly x.
    if (std::max(std::abs(p[0]), std::abs(p[1])) <= 0.5 + 1e-12) {
      EXPECT_NEAR(c2[d], p[0], 1e-15);
    }
  }
}

TEST(Mesh, P1ToP2MatchesDirectBasisExpansionAtP2Nodes) {
  std::mt19937 gen(5);
  const auto p1 = build_space(fixtures::square(4), 1);
  const auto p2 = build_space(fixtures::square(4), 2);
  const Vec c1 = fixtures::random_vec(p1->dofs(), gen);
  const Vec c2 = sogpe::interpolate_p1_to_p2(*p1, *p2, c1);
  const auto mesh1 = oracle::elements(*p1);
  for (int d = 0; d < p2->dofs(); ++d) {
    EXPECT_NEAR(c2[d], oracle::eval_scalar(mesh1, c1, p2->nodes()[p2->dof_node(d)]), 1e-14);
  }
}

TEST(Mesh, P1ToP2ThenEvaluateAgreesWithP1Evaluation) {
  std::mt19937 gen(17);
  const auto p1 = build_space(fixtures::square(8), 1);
  const auto p2 = build_space(fixtures::square(8), 2);
  const Vec c1 = fixtures::random_vec(p1->dofs(), gen);
  const Vec c2 = sogpe::interpolate_p1_to_p2(*p1, *p2, c1);
  const std::vector<Point> pts = random_points(gen, 100);
  const Vec a = sogpe::eval_at_points(*p1, c1, pts);
  const Vec b = sogpe::eval_at_points(*p2, c2, pts);
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Mesh, P1ToP2RejectsMismatchedGrids) {
  const auto p1 = build_space(fixtures::square(4), 1);
  const auto p2 = build_space(fixtures::square(8), 2);
  EXPECT_THROW(sogpe::interpolate_p1_to_p2(*p1, *p2, Vec::Zero(p1->dofs())), sogpe::SpaceMismatch);
  EXPECT_THROW(sogpe::interpolate_p1_to_p2(*p1, *p1, Vec::Zero(p1->dofs())), sogpe::SpaceMismatch);
}

TEST(Mesh, LocateReturnsContainingTriangle) {
  std::mt19937 gen(23);
  const auto space = build_space(fixtures::square(5), 2);
  for (const Point& p : random_points(gen, 200)) {
    const auto loc = space->locate(p);
    EXPECT_GE(loc.xi, -1e-14);
    EXPECT_GE(loc.eta, -1e-14);
    EXPECT_LE(loc.xi + loc.eta, 1.0 + 1e-14);
    const auto tri = space->triangle(loc.triangle);
    const Point& a = space->nodes()[tri[0]];
    const Point& b = space->nodes()[tri[1]];
    const Point& c = space->nodes()[tri[2]];
    EXPECT_NEAR(a[0] + loc.xi * (b[0] - a[0]) + loc.eta * (c[0] - a[0]), p[0], 1e-14);
    EXPECT_NEAR(a[1] + loc.xi * (b[1] - a[1]) + loc.eta * (c[1] - a[1]), p[1], 1e-14);
  }
}

}  // namespace
