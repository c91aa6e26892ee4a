#include "test_helpers.hpp"

#include <gtest/gtest.h>

using namespace popdyn;
using popdyn::testing::vec;

namespace {

// KKT point of the congestion program, computed independently with a convex
// QP solver: x*, and multipliers on x1 ≤ 0.4 and x4 ≤ 0.4.
const Vector kXStar = vec({0.4, 0.0754717, 0.1245283, 0.4});
constexpr double kPStar = -8.909057;

GameSpec zero_potential_game() {
  return build_quadratic_potential(Matrix::Zero(3, 3), vec({1, 1, 0}), {AffineConstraint{vec({1, 1, 1}), 2.0}}, 1.0,
                                   3.0);
}

}  // namespace

TEST(Nash, ConstructedPrimalEquilibriumIsExact) {
  // c = (1,1,0): strategies 1 and 2 tie for best, support on {1,2}.
  const auto game = zero_potential_game();
  const Vector x = vec({0.6, 0.4, 0.0});
  const Vector mu = vec({3, 0});
  const auto r = is_primal_nash(game, x, mu);
  EXPECT_TRUE(r.holds);
  EXPECT_EQ(r.residual, 0.0);
  EXPECT_FALSE(is_primal_nash(game, vec({0.6, 0.3, 0.1}), mu).holds);
}

TEST(Nash, DualOnArgmaxIsExact) {
  const auto game = zero_potential_game();
  // g = (0, −1): the null constraint is the argmax.
  EXPECT_TRUE(is_dual_nash(game, vec({3, 0}), vec({0.6, 0.4, 0.0})).holds);
  const auto r = is_dual_nash(game, vec({2, 1}), vec({0.6, 0.4, 0.0}));
  EXPECT_FALSE(r.holds);
  EXPECT_NEAR(r.residual, 1.0, 1e-15);
}

TEST(Report, RpsBarycenterIsNotInE) {
  const auto game = paper_rps_game();
  const auto r = in_equilibria_set(game, Vector::Constant(3, 1.0 / 3.0), vec({4, 0}));
  EXPECT_FALSE(r.in_equilibria_set);
  EXPECT_NEAR(r.dual_nash_residual, 2.0 / 9.0 - 0.1, 1e-15);
  EXPECT_NEAR(r.feasibility_residual, 2.0 / 9.0 - 0.1, 1e-15);
  EXPECT_EQ(r.primal_nash_residual, 0.0);
  ASSERT_EQ(r.multipliers.size(), 1);
  EXPECT_EQ(r.multipliers[0], 0.0);
}

TEST(Report, CongestionKktPointIsInE) {
  const auto game = paper_congestion_game();
  Vector mu = Vector::Zero(9);
  mu[1] = 9.0301887;  // x1 ≤ 0.4
  mu[4] = 3.0188679;  // x4 ≤ 0.4
  mu[0] = 122.0 - mu[1] - mu[4];
  const auto r = in_equilibria_set(game, kXStar, mu, 1e-5);
  EXPECT_TRUE(r.in_equilibria_set);
  EXPECT_LE(r.feasibility_residual, 1e-12);
  EXPECT_LE(r.complementarity_residual, 1e-5);
  EXPECT_NEAR(r.multipliers[0], 9.0301887, 1e-12);
  EXPECT_FALSE(in_equilibria_set(game, kXStar, Vector(DualState::vertex(9, 0, 122.0).values()), 1e-5).in_equilibria_set);
}

TEST(Report, StrictToleranceIsTighter) {
  const auto game = paper_congestion_game();
  Vector mu = Vector::Zero(9);
  mu[1] = 9.03;
  mu[4] = 3.02;
  mu[0] = 122.0 - mu[1] - mu[4];
  EXPECT_TRUE(in_equilibria_set(game, kXStar, mu, 1e-1).in_equilibria_set);
  EXPECT_FALSE(in_equilibria_set(game, kXStar, mu, 1e-9).in_equilibria_set);
}

TEST(Slater, CongestionMarginAndBound) {
  const auto game = paper_congestion_game();
  const SlaterPoint slater(game, Vector::Constant(4, 0.25));
  EXPECT_NEAR(slater.margin(), 0.1, 1e-15);
  // (0 − (−12.1875)) / 0.1
  EXPECT_NEAR(dual_mass_bound(game, slater, 0.0), 121.875, 1e-9);
  EXPECT_LE(dual_mass_bound(game, slater, 0.0), game.dual_mass());
  EXPECT_EQ(dual_mass_bound(game, slater, potential(game, slater.point())), 0.0);
  EXPECT_THROW(dual_mass_bound(game, slater, -20.0), ConfigError);
}

TEST(Slater, ViolationsNameTheConstraint) {
  const auto game = paper_congestion_game();
  EXPECT_THROW(SlaterPoint(game, vec({0.5, 0.5, 0.0, 0.0})), SlaterError);
  try {
    SlaterPoint(game, vec({0.7, 0.1, 0.1, 0.1}));
    FAIL() << "expected SlaterError";
  } catch (const SlaterError& e) {
    EXPECT_EQ(e.index(), 1);  // x1 ≤ 0.4
  }
  try {
    SlaterPoint(game, vec({0.1, 0.1, 0.1, 0.7}));
    FAIL() << "expected SlaterError";
  } catch (const SlaterError& e) {
    EXPECT_EQ(e.index(), 4);  // x4 ≤ 0.4
  }
}

TEST(Slater, UnconstrainedGameHasNoBound) {
  const auto game = build_quadratic_potential(-Matrix::Identity(2, 2), Vector::Zero(2), {}, 1.0, 1.0);
  const SlaterPoint slater(game, vec({0.5, 0.5}));
  EXPECT_TRUE(std::isinf(slater.margin()));
  EXPECT_EQ(dual_mass_bound(game, slater, 0.0), 0.0);
}

TEST(Oracle, CongestionMatchesQpSolution) {
  const auto result = oracle_solve(paper_congestion_game(), 200, 2000, 0);
  EXPECT_LE(inf_norm(result.x - kXStar), 1e-5);
  EXPECT_NEAR(result.value, kPStar, 1e-5);
  EXPECT_LE(result.gap, 1e-4);
  EXPECT_GT(result.feasible_grid_points, 0U);
  EXPECT_LE(result.feasible_grid_points, result.grid_points);
}

TEST(Oracle, QuadraticPotentialRecoversInteriorMaximizer) {
  // p = −‖x‖² + 2 x̄ᵀx on the simplex is maximized at x̄.
  const Vector target = vec({0.17, 0.5, 0.33});
  const auto game = build_quadratic_potential(-2.0 * Matrix::Identity(3, 3), 2.0 * target, {}, 1.0, 1.0);
  const auto result = oracle_solve(game, 50, 2000, 1);
  EXPECT_LE(inf_norm(result.x - target), 1e-5);
  EXPECT_NEAR(result.value, target.squaredNorm(), 1e-9);
}

TEST(Oracle, Errors) {
  EXPECT_THROW(oracle_solve(paper_rps_game(), 10, 10, 0), UnsupportedError);
  const auto infeasible = build_quadratic_potential(-Matrix::Identity(2, 2), Vector::Zero(2),
                                                    {AffineConstraint{vec({1, 1}), 0.5}}, 1.0, 1.0);
  EXPECT_THROW(oracle_solve(infeasible, 10, 10, 0), InfeasibleError);
  const auto big = build_quadratic_potential(-Matrix::Identity(7, 7), Vector::Zero(7), {}, 1.0, 1.0);
  EXPECT_THROW(oracle_solve(big, 10, 10, 0), ConfigError);
}

TEST(Saddle, CongestionKktPointIsASaddle) {
  const auto game = paper_congestion_game();
  const auto oracle = oracle_solve(game, 200, 2000, 0);
  Vector mu = Vector::Zero(9);
  mu[1] = 9.0301887;
  mu[4] = 3.0188679;
  mu[0] = 122.0 - mu[1] - mu[4];
  const auto v = saddle_check(game, oracle.x, mu, 1000, 5);
  EXPECT_FALSE(v.degenerate);
  EXPECT_LE(v.primal, 1e-6);
  EXPECT_LE(v.dual, 1e-6);
}

TEST(Saddle, NonSaddleIsDetected) {
  const auto game = paper_congestion_game();
  const auto v = saddle_check(game, Vector::Constant(4, 0.25), Vector(DualState::vertex(9, 0, 122.0).values()), 200, 5);
  EXPECT_GT(v.primal, 1.0);
}

TEST(Saddle, NoSamplesIsDegenerate) {
  const auto game = paper_congestion_game();
  const auto v = saddle_check(game, kXStar, Vector(DualState::vertex(9, 0, 122.0).values()), 0, 5);
  EXPECT_TRUE(v.degenerate);
  EXPECT_EQ(v.primal, 0.0);
  EXPECT_EQ(v.dual, 0.0);
}
