#pragma once

#include "popdyn/equilibrium.hpp"
#include "popdyn/games.hpp"
#include "popdyn/lyapunov.hpp"
#include "popdyn/trajectory.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

namespace popdyn::io {

using ordered_json = nlohmann::ordered_json;

/// Shortest round-trip decimal form; NaN is written as the literal token NaN.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Infinity" : "-Infinity";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline Vector vector_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(what + " must be an array of numbers");
    v[static_cast<Index>(i)] = j[i].get<double>();
  }
  return v;
}

inline Matrix matrix_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ConfigError(what + " must be a nonempty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Vector row = vector_from_json(j[r], what + " row");
    if (static_cast<std::size_t>(row.size()) != cols) throw ConfigError(what + " rows must have equal length");
    m.row(static_cast<Index>(r)) = row.transpose();
  }
  return m;
}

inline nlohmann::json to_json_array(const Vector& v) {
  auto arr = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

/// Parses the game schema:
///   {"n", "q", "primal_mass", "dual_mass",
///    "fitness": {"type": "linear", "A"} | {"type": "quadratic_potential", "H", "c"}
///             | {"type": "builtin", "name"},
///    "constraints": [{"type": "affine", "a", "b"} | {"type": "quadratic", "Q", "a", "c"}]}
inline GameSpec game_from_json(const nlohmann::json& j) {
  try {
    const auto n = j.at("n").get<Index>();
    const auto q = j.at("q").get<Index>();
    const double mp = j.at("primal_mass").get<double>();
    const double md = j.at("dual_mass").get<double>();
    const auto& fit = j.at("fitness");
    const auto type = fit.at("type").get<std::string>();

    FitnessRule rule;
    if (type == "linear") {
      rule = LinearFitness{matrix_from_json(fit.at("A"), "fitness.A")};
    } else if (type == "quadratic_potential") {
      rule = QuadraticPotentialFitness{matrix_from_json(fit.at("H"), "fitness.H"), vector_from_json(fit.at("c"), "fitness.c")};
    } else if (type == "builtin") {
      const auto name = fit.at("name").get<std::string>();
      const auto base = builtin_game(name);
      if (!base) throw ConfigError("unknown builtin fitness '" + name + "'");
      rule = base->fitness_rule();
    } else {
      throw ConfigError("unknown fitness type '" + type + "'");
    }

    std::vector<ConstraintSpec> constraints;
    if (j.contains("constraints")) {
      for (const auto& c : j.at("constraints")) {
        const auto ctype = c.at("type").get<std::string>();
        if (ctype == "affine") {
          constraints.emplace_back(AffineConstraint{vector_from_json(c.at("a"), "constraint.a"), c.at("b").get<double>()});
        } else if (ctype == "quadratic") {
          constraints.emplace_back(QuadraticConstraint{matrix_from_json(c.at("Q"), "constraint.Q"),
                                                       vector_from_json(c.at("a"), "constraint.a"),
                                                       c.at("c").get<double>()});
        } else {
          throw ConfigError("unknown constraint type '" + ctype + "'");
        }
      }
    }
    if (static_cast<Index>(constraints.size()) != q) {
      throw ConfigError("\"q\" is " + std::to_string(q) + " but " + std::to_string(constraints.size()) +
                        " constraints are listed");
    }
    return GameSpec(n, mp, md, std::move(rule), std::move(constraints));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed game description: ") + e.what());
  }
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

/// A builtin name ("paper-congestion", "paper-rps") or the path of a game JSON file.
inline GameSpec load_game(const std::string& source) {
  if (auto game = builtin_game(source)) return *game;
  return game_from_json(read_json_file(source));
}

struct StatePair {
  Vector x;
  Vector mu;
};

/// {"x": [...], "mu": [...]}, validated against the game.
inline StatePair state_from_json(const GameSpec& game, const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("x") || !j.contains("mu")) throw ConfigError("state needs \"x\" and \"mu\" arrays");
  StatePair s{vector_from_json(j.at("x"), "x"), vector_from_json(j.at("mu"), "mu")};
  (void)game.primal_state(s.x);
  (void)game.dual_state(s.mu);
  return s;
}

inline ordered_json state_to_json(const Vector& x, const Vector& mu) {
  ordered_json j;
  j["x"] = to_json_array(x);
  j["mu"] = to_json_array(mu);
  return j;
}

inline ordered_json report_to_json(const EquilibriumReport& r) {
  ordered_json j;
  j["verdict"] = r.in_equilibria_set ? "in_E" : "not_in_E";
  j["tolerance"] = r.tolerance;
  j["primal_nash_residual"] = r.primal_nash_residual;
  j["dual_nash_residual"] = r.dual_nash_residual;
  j["feasibility_residual"] = r.feasibility_residual;
  j["complementarity_residual"] = r.complementarity_residual;
  j["saddle_violation"] = r.saddle_violation;
  j["multipliers"] = to_json_array(r.multipliers);
  return j;
}

inline ordered_json audit_to_json(const LyapunovAudit& a, double audit_tol) {
  ordered_json j;
  j["audit_tol"] = audit_tol;
  j["steps"] = a.steps();
  j["initial_value"] = a.values.front();
  j["final_value"] = a.values.back();
  j["max_increase"] = a.max_increase;
  j["violation_count"] = a.violation_steps.size();
  j["nonincreasing_fraction"] = a.nonincreasing_fraction();
  j["nonnegativity_ok"] = a.nonnegativity_ok;
  j["violation_steps"] = a.violation_steps;
  return j;
}

inline std::string trajectory_header(const GameSpec& game) {
  std::ostringstream os;
  os << 't';
  for (Index i = 1; i <= game.n(); ++i) os << ",x_" << i;
  for (Index k = 0; k <= game.q(); ++k) os << ",mu_" << k;
  os << ",V,p,g_max,xdot_norm,mudot_norm";
  return os.str();
}

/// One row per recorded state (every `record_every`-th, plus the last).
/// g_max is the largest constraint value over k ≥ 1 (0 when there are none).
inline void write_trajectory_csv(std::ostream& out, const GameSpec& game, const Trajectory& traj,
                                 std::size_t record_every = 1) {
  if (record_every < 1) record_every = 1;
  out << trajectory_header(game) << '\n';
  for (std::size_t t = 0; t < traj.size(); ++t) {
    if (t % record_every != 0 && t + 1 != traj.size()) continue;
    const auto& d = traj.diagnostics[t];
    out << format_number(traj.times[t]);
    for (Index i = 0; i < game.n(); ++i) out << ',' << format_number(traj.primal[t][i]);
    for (Index k = 0; k <= game.q(); ++k) out << ',' << format_number(traj.dual[t][k]);
    const double g_max = d.constraints.size() > 1 ? d.constraints.tail(d.constraints.size() - 1).maxCoeff() : 0.0;
    out << ',' << format_number(d.lyapunov) << ',' << format_number(d.potential) << ',' << format_number(g_max) << ','
        << format_number(d.primal_field_norm) << ',' << format_number(d.dual_field_norm) << '\n';
  }
}

}  // namespace popdyn::io
