#pragma once

#include "popdyn/dynamics.hpp"
#include "popdyn/equilibrium.hpp"
#include "popdyn/games.hpp"
#include "popdyn/lyapunov.hpp"

#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace popdyn {

/// Thresholds checked by the two reference experiments.
namespace repro_thresholds {
inline constexpr double kHorizon = 200.0;
inline constexpr double kStep = 0.01;
inline constexpr double kFeasibility = 1e-3;       // max_k g_k(x) at the endpoint
inline constexpr double kOracleDistance = 1e-2;    // ‖x − x*_oracle‖_∞
inline constexpr double kReportTol = 1e-3;         // equilibrium-report tolerance
inline constexpr double kAuditTol = 1e-8;          // per-step V increase
inline constexpr double kAuditFraction = 0.999;    // share of nonincreasing steps
inline constexpr double kEndpointLyapunov = 1e-9;  // V at a converged endpoint
inline constexpr int kOracleResolution = 200;
inline constexpr int kOracleRefineIters = 2000;
inline constexpr double kRpsEndpointTol = 1e-2;
inline constexpr double kRpsCapSlack = 1e-6;
inline constexpr double kRpsActiveFloor = 0.098;
}  // namespace repro_thresholds

/// Reference RPS endpoint [0.313, 0.044, 0.643] (three-digit rounding).
inline Vector rps_reference_endpoint() { return (Vector(3) << 0.313, 0.044, 0.643).finished(); }

struct CriterionResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ReproResult {
  GameSpec game;
  Trajectory trajectory;
  EquilibriumReport report;
  LyapunovAudit audit;
  std::optional<OracleResult> oracle;
  std::vector<CriterionResult> criteria;

  bool passed() const {
    for (const auto& c : criteria) {
      if (!c.passed) return false;
    }
    return true;
  }
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

inline void add(std::vector<CriterionResult>& out, std::string name, bool ok, std::string detail) {
  out.push_back({std::move(name), ok, std::move(detail)});
}

inline SimParams repro_params(double step, std::uint64_t seed) {
  SimParams p;
  p.step = step;
  p.horizon = repro_thresholds::kHorizon;
  p.seed = seed;
  return p;
}

}  // namespace detail

inline OracleResult congestion_oracle(std::uint64_t seed = 0) {
  return oracle_solve(paper_congestion_game(), repro_thresholds::kOracleResolution,
                      repro_thresholds::kOracleRefineIters, seed);
}

/// Congestion experiment: μ(0) = (122, 0, …, 0), x(0) drawn uniformly from Δ_P
/// with `seed`, Smith protocol for both populations, Euler.
inline ReproResult repro_congestion(std::uint64_t seed, const OracleResult& oracle,
                                    double step = repro_thresholds::kStep) {
  namespace th = repro_thresholds;
  GameSpec game = paper_congestion_game();
  const Protocol smith = smith_protocol();
  const PrimalState x0 = sample_simplex(game.n(), game.primal_mass(), seed);
  Trajectory traj = integrate(game, smith, x0, game.null_dual_state(), detail::repro_params(step, seed));

  const Vector& x = traj.final_primal();
  const Vector& mu = traj.final_dual();
  EquilibriumReport report = in_equilibria_set(game, x, mu, th::kReportTol);
  LyapunovAudit audit = monotonicity_audit(game, smith, smith, traj, th::kAuditTol);

  std::vector<CriterionResult> c;
  detail::add(c, "converged", traj.converged,
              "converged at t=" + detail::fmt(traj.times.back()) + " within horizon " + detail::fmt(th::kHorizon));
  const double g_max = constraint_values(game, x).tail(game.q()).maxCoeff();
  detail::add(c, "feasible", g_max <= th::kFeasibility, "max_k g_k = " + detail::fmt(g_max));
  const double dist = inf_norm(x - oracle.x);
  detail::add(c, "oracle_match", dist <= th::kOracleDistance, "|x - x*_oracle|_inf = " + detail::fmt(dist));
  detail::add(c, "in_equilibria_set", report.in_equilibria_set,
              "primal residual " + detail::fmt(report.primal_nash_residual) + ", dual residual " +
                  detail::fmt(report.dual_nash_residual));
  detail::add(c, "lyapunov_monotone", audit.nonincreasing_fraction() >= th::kAuditFraction,
              "nonincreasing fraction " + detail::fmt(audit.nonincreasing_fraction()));
  detail::add(c, "lyapunov_endpoint", audit.values.back() <= th::kEndpointLyapunov,
              "V(end) = " + detail::fmt(audit.values.back()));
  return {std::move(game), std::move(traj), report, std::move(audit), oracle, std::move(c)};
}

inline ReproResult repro_congestion(std::uint64_t seed) { return repro_congestion(seed, congestion_oracle()); }

/// RPS experiment: x(0) at the barycenter, μ(0) = (4, 0), Smith, Euler.
inline ReproResult repro_rps(double step = repro_thresholds::kStep) {
  namespace th = repro_thresholds;
  GameSpec game = paper_rps_game();
  const Protocol smith = smith_protocol();
  const PrimalState x0 = PrimalState::barycenter(3, game.primal_mass());
  const DualState mu0 = game.dual_state((Vector(2) << 4.0, 0.0).finished());
  Trajectory traj = integrate(game, smith, x0, mu0, detail::repro_params(step, 0));

  const Vector& x = traj.final_primal();
  const Vector& mu = traj.final_dual();
  EquilibriumReport report = in_equilibria_set(game, x, mu, th::kReportTol);
  LyapunovAudit audit = monotonicity_audit(game, smith, smith, traj, th::kAuditTol);

  std::vector<CriterionResult> c;
  detail::add(c, "converged", traj.converged, "converged at t=" + detail::fmt(traj.times.back()));
  const double dist = inf_norm(x - rps_reference_endpoint());
  detail::add(c, "endpoint", dist <= th::kRpsEndpointTol, "|x - [0.313,0.044,0.643]|_inf = " + detail::fmt(dist));
  const double load = x[0] * x[0] + x[1] * x[1];
  detail::add(c, "constraint_satisfied", load <= 0.1 + th::kRpsCapSlack, "x1^2+x2^2 = " + detail::fmt(load));
  detail::add(c, "constraint_active", load >= th::kRpsActiveFloor, "x1^2+x2^2 = " + detail::fmt(load));
  detail::add(c, "lyapunov_nonnegative", audit.nonnegativity_ok, "min V >= -1e-12");
  detail::add(c, "lyapunov_monotone", audit.nonincreasing_fraction() >= th::kAuditFraction,
              "nonincreasing fraction " + detail::fmt(audit.nonincreasing_fraction()));
  return {std::move(game), std::move(traj), report, std::move(audit), std::nullopt, std::move(c)};
}

}  // namespace popdyn
