#include "popdyn/io.hpp"
#include "test_helpers.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace popdyn;
using popdyn::testing::vec;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

Trajectory short_run(const GameSpec& game, double horizon) {
  SimParams p;
  p.horizon = horizon;
  p.warn = {};
  return integrate(game, smith_protocol(), sample_simplex(game.n(), game.primal_mass(), 2),
                   DualState::vertex(game.q() + 1, 0, game.dual_mass()), p);
}

}  // namespace

TEST(Format, RoundTripsAndNaN) {
  EXPECT_EQ(io::format_number(kNaN), "NaN");
  EXPECT_EQ(io::format_number(0.5), "0.5");
  const double v = 0.1 + 0.2;
  EXPECT_EQ(std::stod(io::format_number(v)), v);
}

TEST(Csv, HeaderAndConstantColumnCount) {
  for (const auto& game : popdyn::testing::builtin_games()) {
    const auto traj = short_run(game, 0.5);
    std::ostringstream os;
    io::write_trajectory_csv(os, game, traj);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, io::trajectory_header(game));
    const auto expected_cols = static_cast<std::size_t>(1 + game.n() + game.q() + 1 + 3 + 2);
    EXPECT_EQ(split(line, ',').size(), expected_cols);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      EXPECT_EQ(split(line, ',').size(), expected_cols);
      ++rows;
    }
    EXPECT_EQ(rows, traj.size());
  }
}

TEST(Csv, RpsHeader) {
  EXPECT_EQ(io::trajectory_header(paper_rps_game()), "t,x_1,x_2,x_3,mu_0,mu_1,V,p,g_max,xdot_norm,mudot_norm");
}

TEST(Csv, PotentialFreeGameWritesNaN) {
  const auto game = paper_rps_game();
  const auto traj = short_run(game, 0.02);
  std::ostringstream os;
  io::write_trajectory_csv(os, game, traj);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  EXPECT_EQ(split(line, ',')[7], "NaN");
}

TEST(Csv, RecordEveryKeepsLastRow) {
  const auto game = paper_rps_game();
  const auto traj = short_run(game, 0.1);  // 11 states
  std::ostringstream os;
  io::write_trajectory_csv(os, game, traj, 4);
  const auto lines = split(os.str(), '\n');
  ASSERT_EQ(lines.size(), 1U + 4U);  // header, t = 0, 0.04, 0.08, 0.1
  EXPECT_EQ(std::stod(split(lines.back(), ',')[0]), traj.times.back());
}

TEST(GameJson, LinearAndQuadratic) {
  const auto j = nlohmann::json::parse(R"({
    "n": 3, "q": 1, "primal_mass": 1, "dual_mass": 4,
    "fitness": {"type": "linear", "A": [[0,-1,2],[2,0,-1],[-1,2,0]]},
    "constraints": [{"type": "quadratic", "Q": [[1,0,0],[0,1,0],[0,0,0]], "a": [0,0,0], "c": 0.1}]
  })");
  const auto game = io::game_from_json(j);
  const auto ref = paper_rps_game();
  popdyn::testing::StateSampler sampler(ref, 1);
  for (int s = 0; s < 20; ++s) {
    const Vector x = sampler.primal();
    const Vector mu = sampler.dual();
    EXPECT_EQ(primal_dual_payoff(game, x, mu), primal_dual_payoff(ref, x, mu));
    EXPECT_EQ(constraint_values(game, x), constraint_values(ref, x));
  }
}

TEST(GameJson, QuadraticPotentialAndBuiltin) {
  const auto qp = io::game_from_json(nlohmann::json::parse(R"({
    "n": 2, "q": 1, "primal_mass": 1, "dual_mass": 1,
    "fitness": {"type": "quadratic_potential", "H": [[-2,0],[0,-2]], "c": [0,0]},
    "constraints": [{"type": "affine", "a": [1,0], "b": 0.8}]
  })"));
  EXPECT_NEAR(potential(qp, vec({0.3, 0.7})), -(0.09 + 0.49), 1e-15);

  const auto builtin = io::game_from_json(nlohmann::json::parse(R"({
    "n": 4, "q": 0, "primal_mass": 1, "dual_mass": 1,
    "fitness": {"type": "builtin", "name": "paper-congestion"}
  })"));
  EXPECT_EQ(builtin.q(), 0);
  EXPECT_NEAR(potential(builtin, Vector::Constant(4, 0.25)), -12.1875, 1e-12);
}

TEST(GameJson, MalformedInputsAreConfigErrors) {
  EXPECT_THROW(io::game_from_json(nlohmann::json::parse(R"({"n": 2})")), ConfigError);
  EXPECT_THROW(io::game_from_json(nlohmann::json::parse(R"({
    "n": 2, "q": 2, "primal_mass": 1, "dual_mass": 1,
    "fitness": {"type": "linear", "A": [[0,0],[0,0]]},
    "constraints": [{"type": "affine", "a": [1,0], "b": 0.8}]})")),
               ConfigError);
  EXPECT_THROW(io::game_from_json(nlohmann::json::parse(R"({
    "n": 2, "q": 0, "primal_mass": 1, "dual_mass": 1,
    "fitness": {"type": "replicator"}})")),
               ConfigError);
  EXPECT_THROW(io::game_from_json(nlohmann::json::parse(R"({
    "n": 2, "q": 0, "primal_mass": 1, "dual_mass": 1,
    "fitness": {"type": "linear", "A": [[0,"a"],[0,0]]}})")),
               ConfigError);
  EXPECT_THROW(io::load_game("/nonexistent/game.json"), ConfigError);
}

TEST(StateJson, RoundTripAndValidation) {
  const auto game = paper_rps_game();
  const Vector x = vec({0.1, 0.2, 0.7});
  const Vector mu = vec({3.0, 1.0});
  const auto j = nlohmann::json::parse(io::state_to_json(x, mu).dump());
  const auto s = io::state_from_json(game, j);
  EXPECT_EQ(s.x, x);
  EXPECT_EQ(s.mu, mu);
  EXPECT_THROW(io::state_from_json(game, nlohmann::json::parse(R"({"x": [0.5, 0.5], "mu": [4, 0]})")), ConfigError);
  EXPECT_THROW(io::state_from_json(game, nlohmann::json::parse(R"({"x": [1, 0, 0]})")), ConfigError);
}

TEST(ReportJson, StableKeyOrder) {
  const auto game = paper_rps_game();
  const auto j = io::report_to_json(in_equilibria_set(game, Vector::Constant(3, 1.0 / 3.0), vec({4, 0}), 1e-3));
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"verdict", "tolerance", "primal_nash_residual", "dual_nash_residual",
                                            "feasibility_residual", "complementarity_residual", "saddle_violation",
                                            "multipliers"}));
  EXPECT_EQ(j["verdict"], "not_in_E");
}
