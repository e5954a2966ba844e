#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fem_oracle.hpp"
#include "fixtures.hpp"
#include "sogpe/a_method.hpp"
#include "sogpe/errors.hpp"

namespace {

using sogpe::AStepConfig;
using sogpe::SpinorField;
using sogpe::Vec;

AStepConfig fixed(double tau) {
  AStepConfig cfg;
  cfg.strategy = AStepConfig::TauStrategy::Fixed;
  cfg.tau = tau;
  return cfg;
}

struct GroundStateCase {
  sogpe::Discretization disc;
  oracle::DenseGroundState gs;
};

const GroundStateCase& mild_ground_state() {
  static const GroundStateCase c = [] {
    auto disc = fixtures::make_disc(4, 2, fixtures::mild_physics());
    const oracle::DenseModel model(disc.space(), fixtures::mild_physics());
    auto gs = oracle::ground_state(model, sogpe::initial_state(disc).coeffs());
    return GroundStateCase{std::move(disc), std::move(gs)};
  }();
  return c;
}

TEST(AMethod, EigenfunctionIsAFixedPoint) {
  const auto& c = mild_ground_state();
  ASSERT_LE(c.gs.residual, 1e-11);
  const SpinorField u(c.disc.space_ptr(), c.gs.u);
  EXPECT_LE(sogpe::h1_distance(c.disc, sogpe::a_step_plain(c.disc, u), u), 1e-9);
  for (double tau : {0.3, 1.0, 1.7}) {
    const auto step = sogpe::a_step_damped(c.disc, u, fixed(tau));
    EXPECT_LE(sogpe::h1_distance(c.disc, step.u, u), 1e-9) << "tau " << tau;
  }
}

TEST(AMethod, DirectionVanishesAtEigenfunction) {
  const auto& c = mild_ground_state();
  const SpinorField u(c.disc.space_ptr(), c.gs.u);
  sogpe::AOperatorSolver solver(c.disc);
  const sogpe::ADirection dir = sogpe::a_direction(c.disc, u, solver);
  EXPECT_LE(std::sqrt(c.disc.mass(dir.d)), 1e-9);
  // A(u) u = lambda M u gives z = u / lambda.
  EXPECT_NEAR(dir.gamma, c.gs.lambda, 1e-9 * c.gs.lambda);
}

TEST(AMethod, DirectionIsTangent) {
  std::mt19937 gen(1);
  const auto disc = fixtures::make_disc(6, 2, fixtures::k0_10_physics());
  sogpe::AOperatorSolver solver(disc);
  for (int k = 0; k < 10; ++k) {
    const SpinorField u = fixtures::random_field(disc, gen);
    const sogpe::ADirection dir = sogpe::a_direction(disc, u, solver);
    const Vec mu = disc.mass_padded() * u.coeffs();
    EXPECT_LE(std::abs(mu.dot(dir.d)), 1e-10 * std::sqrt(disc.mass(dir.d)));
  }
}

TEST(AMethod, PlainStepMatchesDenseInverseIteration) {
  std::mt19937 gen(2);
  for (const auto& params : {fixtures::mild_physics(), fixtures::k0_10_physics()}) {
    const auto disc = fixtures::make_disc(4, 2, params);
    const oracle::DenseModel model(disc.space(), params);
    const SpinorField u = fixtures::random_field(disc, gen);
    Vec z = model.A(u.coeffs()).lu().solve(model.mass() * u.coeffs());
    z /= std::sqrt(z.dot(model.mass() * z));
    const SpinorField next = sogpe::a_step_plain(disc, u);
    EXPECT_LE((next.coeffs() - z).cwiseAbs().maxCoeff(), 1e-10 * z.cwiseAbs().maxCoeff());
    EXPECT_NEAR(sogpe::mass(disc, next), 1.0, 1e-13);
  }
}

TEST(AMethod, UnitStepEqualsPlainStep) {
  std::mt19937 gen(3);
  const auto disc = fixtures::make_disc(6, 2, fixtures::k0_10_physics());
  const SpinorField u = fixtures::random_field(disc, gen);
  const auto damped = sogpe::a_step_damped(disc, u, fixed(1.0));
  const SpinorField plain = sogpe::a_step_plain(disc, u);
  EXPECT_LE((damped.u.coeffs() - plain.coeffs()).cwiseAbs().maxCoeff(), 1e-12 * plain.coeffs().cwiseAbs().maxCoeff());
  EXPECT_EQ(damped.tau, 1.0);
}

TEST(AMethod, PredictedEnergyEqualsEnergyOfNewIterate) {
  std::mt19937 gen(4);
  const auto disc = fixtures::make_disc(6, 2, fixtures::k0_10_physics());
  const SpinorField u = fixtures::random_field(disc, gen);
  for (double tau : {0.1, 0.8, 1.5}) {
    const auto step = sogpe::a_step_damped(disc, u, fixed(tau));
    const double e = sogpe::energy(disc, step.u);
    EXPECT_NEAR(step.energy, e, 1e-11 * e) << "tau " << tau;
    EXPECT_NEAR(sogpe::mass(disc, step.u), 1.0, 1e-13);
  }
}

TEST(AMethod, OneStepFromInitialStateLowersEnergy) {
  for (const auto& params : {fixtures::mild_physics(), fixtures::k0_10_physics()}) {
    const auto disc = fixtures::make_disc(8, 2, params);
    const SpinorField u0 = sogpe::initial_state(disc);
    const double e0 = sogpe::energy(disc, u0);
    EXPECT_LT(sogpe::a_step_damped(disc, u0, AStepConfig{}).energy, e0);
    EXPECT_LT(sogpe::energy(disc, sogpe::a_step_plain(disc, u0)), e0);
  }
}

TEST(AMethod, LineSearchFindsTheGridMinimum) {
  const auto disc = fixtures::make_disc(8, 2, fixtures::k0_10_physics());
  SpinorField u = sogpe::initial_state(disc);
  const AStepConfig cfg;
  for (int it = 0; it < 3; ++it) {
    sogpe::AOperatorSolver solver(disc);
    const sogpe::ADirection dir = sogpe::a_direction(disc, u, solver);
    double best_tau = 0.0, best_e = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 1000; ++k) {
      const double tau = cfg.tau_min + (cfg.tau_max - cfg.tau_min) * k / 999.0;
      const double e = sogpe::energy(disc, sogpe::normalize(disc, SpinorField(u.space_ptr(), u.coeffs() + tau * dir.d)));
      if (e < best_e) {
        best_e = e;
        best_tau = tau;
      }
    }
    const auto step = sogpe::a_step_damped(disc, u, cfg);
    EXPECT_NEAR(step.tau, best_tau, 1e-3) << "iteration " << it;
    EXPECT_LE(step.energy, best_e + 1e-10 * best_e);
    u = step.u;
  }
}

TEST(AMethod, GoldenSectionLocatesQuadraticMinimum) {
  const auto phi = [](double t) { return (t - 0.7) * (t - 0.7); };
  const auto r = sogpe::golden_section(phi, 0.01, 1.99, 30);
  EXPECT_NEAR(r.tau, 0.7, 1e-5);
  EXPECT_LE(r.evaluations, 30);
  // A minimum on the boundary is returned exactly.
  const auto edge = sogpe::golden_section([](double t) { return -t; }, 0.01, 1.99, 20);
  EXPECT_EQ(edge.tau, 1.99);
  EXPECT_EQ(edge.evaluations, 20);
  const auto warm = sogpe::golden_section(phi, 0.01, 1.99, 3, 0.7);
  EXPECT_EQ(warm.tau, 0.7);
  EXPECT_EQ(warm.value, 0.0);
  EXPECT_LE(warm.evaluations, 3);
}

TEST(AMethod, RunLowersEnergyMonotonicallyOnTheManifold) {
  const auto disc = fixtures::make_disc(8, 2, fixtures::k0_10_physics());
  sogpe::StoppingRule stop;
  stop.energy_diff_tol = 1e-12;
  stop.max_iters = 150;
  double previous = sogpe::energy(disc, sogpe::initial_state(disc));
  int seen = 0;
  const auto result = sogpe::run_a_method(disc, sogpe::initial_state(disc), AStepConfig{}, stop,
                                          [&](const sogpe::IterationRecord& rec, const SpinorField& u) {
                                            EXPECT_EQ(rec.iter, ++seen);
                                            EXPECT_EQ(rec.method, "A2");
                                            EXPECT_LE(rec.energy - previous, 1e-12) << "iteration " << rec.iter;
                                            EXPECT_NEAR(sogpe::mass(disc, u), 1.0, 1e-12);
                                            ASSERT_TRUE(rec.tau.has_value());
                                            EXPECT_FALSE(rec.sigma.has_value());
                                            previous = rec.energy;
                                          });
  // Contraction is slow at this coupling; the cap ends the run.
  EXPECT_EQ(result.reason, sogpe::StopReason::IterationCap);
  EXPECT_FALSE(result.converged());
  EXPECT_EQ(seen, 150);
  EXPECT_EQ(static_cast<int>(result.history.size()), seen);
}

TEST(AMethod, RunConvergesToOracleGroundState) {
  const auto& c = mild_ground_state();
  sogpe::StoppingRule stop;
  stop.energy_diff_tol.reset();
  stop.residual_tol = 1e-10;
  stop.max_iters = 2000;
  const auto result = sogpe::run_a_method(c.disc, sogpe::initial_state(c.disc), AStepConfig{}, stop);
  ASSERT_TRUE(result.converged()) << result.diagnostics;
  EXPECT_EQ(result.reason, sogpe::StopReason::Residual);
  EXPECT_NEAR(result.state.lambda, c.gs.lambda, 1e-9);
  EXPECT_LE(sogpe::quotient_distance(c.disc, result.state.u, SpinorField(c.disc.space_ptr(), c.gs.u)), 1e-8);
}

TEST(AMethod, ZeroIterationCapReturnsInitialState) {
  const auto disc = fixtures::make_disc(4, 2, fixtures::mild_physics());
  sogpe::StoppingRule stop;
  stop.max_iters = 0;
  const SpinorField u0 = sogpe::initial_state(disc);
  const auto result = sogpe::run_a_method(disc, u0, AStepConfig{}, stop);
  EXPECT_EQ(result.reason, sogpe::StopReason::IterationCap);
  EXPECT_TRUE(result.history.empty());
  EXPECT_EQ(result.state.u.coeffs(), u0.coeffs());
  EXPECT_FALSE(result.diagnostics.empty());
}

TEST(AMethod, SolverFallsBackToLuForIndefiniteOperator) {
  std::mt19937 gen(5);
  auto params = fixtures::k0_10_physics();
  params.potential_shift_enabled = false;
  const auto disc = fixtures::make_disc(6, 2, params);
  const sogpe::SpMat a = sogpe::assemble_A(disc, fixtures::random_field(disc, gen));
  ASSERT_LT(Eigen::SelfAdjointEigenSolver<sogpe::Mat>(fixtures::dense(a)).eigenvalues()[0], 0.0);
  sogpe::AOperatorSolver solver(disc);
  const Vec b = fixtures::random_vec(a.rows(), gen);
  const Vec x = solver.solve(a, b);
  EXPECT_LE((a * x - b).norm(), 1e-10 * b.norm());
}

TEST(AMethod, InvalidConfigurationsAreRejected) {
  EXPECT_THROW(fixed(0.0).validate(), sogpe::ConfigError);
  EXPECT_THROW(fixed(2.0).validate(), sogpe::ConfigError);
  EXPECT_NO_THROW(fixed(1.99).validate());
  AStepConfig cfg;
  cfg.tau_min = 1.5;
  cfg.tau_max = 1.0;
  EXPECT_THROW(cfg.validate(), sogpe::ConfigError);
  cfg = AStepConfig{};
  cfg.tau_max = 2.0;
  EXPECT_THROW(cfg.validate(), sogpe::ConfigError);
  cfg = AStepConfig{};
  cfg.line_search_evals = 2;
  EXPECT_THROW(cfg.validate(), sogpe::ConfigError);
  sogpe::StoppingRule stop;
  stop.energy_diff_tol = -1.0;
  EXPECT_THROW(stop.validate(), sogpe::ConfigError);
  stop = sogpe::StoppingRule{};
  stop.max_iters = -1;
  EXPECT_THROW(stop.validate(), sogpe::ConfigError);
}

}  // namespace
