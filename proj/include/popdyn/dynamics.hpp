#pragma once

#include "popdyn/fields.hpp"
#include "popdyn/lyapunov.hpp"
#include "popdyn/trajectory.hpp"

#include <sstream>

namespace popdyn {

namespace detail {

struct FieldPair {
  Vector xdot;
  Vector mudot;
};

inline FieldPair coupled_field(const GameSpec& game, const Protocol& primal_protocol, const Protocol& dual_protocol,
                               const Vector& x, const Vector& mu) {
  return {primal_field(game, primal_protocol, x, mu), dual_field(game, dual_protocol, x, mu)};
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace detail

/// Fixed-step integration of the coupled primal-dual field from (x0, μ0).
///
/// After each step negative entries are clipped and each population is
/// rescaled to its mass when the drift exceeds 1e-12. Integration stops at the
/// horizon or once ‖ẋ‖_∞ + ‖μ̇‖_∞ < convergence_tol has held for
/// convergence_window consecutive recorded states.
inline Trajectory integrate(const GameSpec& game, const Protocol& primal_protocol, const Protocol& dual_protocol,
                            const PrimalState& x0, const DualState& mu0, const SimParams& params) {
  params.validate();
  game.check_primal_size(x0);
  game.check_dual_size(mu0);
  if (std::abs(x0.mass() - game.primal_mass()) > kSimplexTolerance ||
      std::abs(mu0.mass() - game.dual_mass()) > kSimplexTolerance) {
    throw ConfigError("initial states must carry the game's primal and dual masses");
  }

  const double h = params.step;
  const auto max_steps = static_cast<std::size_t>(std::llround(params.horizon / h));
  const bool has_potential = game.has_potential();

  Trajectory traj;
  traj.step = h;
  traj.times.reserve(max_steps + 1);

  Vector x = x0.values();
  Vector mu = mu0.values();
  std::size_t quiet = 0;

  for (std::size_t step = 0;; ++step) {
    const auto field = detail::coupled_field(game, primal_protocol, dual_protocol, x, mu);
    if (!detail::all_finite(field.xdot) || !detail::all_finite(field.mudot)) {
      throw DivergedError(step, "non-finite field value");
    }

    StepDiagnostics diag;
    diag.potential = has_potential ? potential(game, x) : kNaN;
    diag.constraints = constraint_values(game, x);
    diag.lyapunov = lyapunov_value(game, primal_protocol, dual_protocol, x, mu);
    diag.primal_field_norm = inf_norm(field.xdot);
    diag.dual_field_norm = inf_norm(field.mudot);

    traj.times.push_back(static_cast<double>(step) * h);
    traj.primal.emplace_back(x, game.primal_mass());
    traj.dual.emplace_back(mu, game.dual_mass());
    traj.diagnostics.push_back(std::move(diag));

    const auto& last = traj.diagnostics.back();
    quiet = last.primal_field_norm + last.dual_field_norm < params.convergence_tol ? quiet + 1 : 0;
    if (quiet >= params.convergence_window) {
      traj.converged = true;
      break;
    }
    if (step == max_steps) break;

    if (params.integrator == Integrator::Euler) {
      x += h * field.xdot;
      mu += h * field.mudot;
    } else {
      const auto k2 = detail::coupled_field(game, primal_protocol, dual_protocol, x + 0.5 * h * field.xdot,
                                            mu + 0.5 * h * field.mudot);
      const auto k3 = detail::coupled_field(game, primal_protocol, dual_protocol, x + 0.5 * h * k2.xdot,
                                            mu + 0.5 * h * k2.mudot);
      const auto k4 =
          detail::coupled_field(game, primal_protocol, dual_protocol, x + h * k3.xdot, mu + h * k3.mudot);
      x += h / 6.0 * (field.xdot + 2.0 * k2.xdot + 2.0 * k3.xdot + k4.xdot);
      mu += h / 6.0 * (field.mudot + 2.0 * k2.mudot + 2.0 * k3.mudot + k4.mudot);
    }
    if (!detail::all_finite(x) || !detail::all_finite(mu)) throw DivergedError(step + 1, "non-finite state");

    const double repair = std::max(repair_to_simplex(x, game.primal_mass()), repair_to_simplex(mu, game.dual_mass()));
    traj.max_repair = std::max(traj.max_repair, repair);
    if (repair > 1e-6) {
      ++traj.repair_warnings;
      if (params.warn) {
        std::ostringstream os;
        os << "simplex repair of size " << repair << " after step " << step + 1;
        params.warn(os.str());
      }
    }
  }
  return traj;
}

inline Trajectory integrate(const GameSpec& game, const Protocol& protocol, const PrimalState& x0,
                            const DualState& mu0, const SimParams& params) {
  return integrate(game, protocol, protocol, x0, mu0, params);
}

}  // namespace popdyn
