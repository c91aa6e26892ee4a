#pragma once

#include "popdyn/fields.hpp"
#include "popdyn/trajectory.hpp"

#include <vector>

namespace popdyn {

namespace detail {

/// Σ_i s_i Σ_j A(π_j − π_i), A the protocol integral.
inline double weighted_incentive_integral(const Protocol& protocol, const Vector& state, const Vector& payoff) {
  double total = 0.0;
  for (Index i = 0; i < state.size(); ++i) {
    if (state[i] == 0.0) continue;
    double row = 0.0;
    for (Index j = 0; j < state.size(); ++j) {
      if (j != i) row += protocol.integral(payoff[j] - payoff[i]);
    }
    total += state[i] * row;
  }
  return total;
}

/// Γ_i = Σ_j A(π_j − π_i).
inline Vector incentive_integral_sums(const Protocol& protocol, const Vector& payoff) {
  Vector gamma = Vector::Zero(payoff.size());
  for (Index i = 0; i < payoff.size(); ++i) {
    for (Index j = 0; j < payoff.size(); ++j) {
      if (j != i) gamma[i] += protocol.integral(payoff[j] - payoff[i]);
    }
  }
  return gamma;
}

}  // namespace detail

/// V(x, μ) = Σ_i x_i Σ_j P_i^j + Σ_k μ_k Σ_l Φ_k^l, where P_i^j integrates the
/// primal protocol up to f^μ_j − f^μ_i and Φ_k^l the dual protocol up to g_l − g_k.
inline double lyapunov_value(const GameSpec& game, const Protocol& primal_protocol, const Protocol& dual_protocol,
                             const Vector& x, const Vector& mu) {
  return detail::weighted_incentive_integral(primal_protocol, x, primal_dual_payoff(game, x, mu)) +
         detail::weighted_incentive_integral(dual_protocol, mu, constraint_values(game, x));
}

/// The three terms of dV/dt along the continuous flow:
///   Γ_Pᵀẋ  +  ẋᵀ Df^μ ẋ  +  Γ_Φᵀμ̇.
/// Each is nonpositive for concave potentials (or stable games) with convex constraints.
struct LyapunovDerivative {
  double primal_incentive = 0.0;  // Γ_Pᵀẋ
  double curvature = 0.0;         // ẋᵀ Df^μ ẋ
  double dual_incentive = 0.0;    // Γ_Φᵀμ̇
  double total() const noexcept { return primal_incentive + curvature + dual_incentive; }
};

inline LyapunovDerivative lyapunov_derivative(const GameSpec& game, const Protocol& primal_protocol,
                                              const Protocol& dual_protocol, const Vector& x, const Vector& mu) {
  const Vector payoff = primal_dual_payoff(game, x, mu);
  const Vector g = constraint_values(game, x);
  const Vector xdot = pairwise_comparison_field(primal_protocol, x, payoff);
  const Vector mudot = pairwise_comparison_field(dual_protocol, mu, g);
  LyapunovDerivative d;
  d.primal_incentive = detail::incentive_integral_sums(primal_protocol, payoff).dot(xdot);
  d.curvature = xdot.dot(primal_dual_jacobian(game, x, mu) * xdot);
  d.dual_incentive = detail::incentive_integral_sums(dual_protocol, g).dot(mudot);
  return d;
}

struct LyapunovAudit {
  std::vector<double> values;
  double max_increase = 0.0;  // max_t V(t+h) − V(t); nonpositive for a monotone trajectory
  std::vector<std::size_t> violation_steps;
  bool nonnegativity_ok = true;

  std::size_t steps() const noexcept { return values.size() < 2 ? 0 : values.size() - 1; }
  /// Fraction of steps whose increase stays within the audit tolerance.
  double nonincreasing_fraction() const noexcept {
    return steps() == 0 ? 1.0 : 1.0 - static_cast<double>(violation_steps.size()) / static_cast<double>(steps());
  }
};

/// Discrete monotonicity audit of V along recorded states. Step t is flagged
/// when V(t+1) − V(t) exceeds `audit_tol`.
inline LyapunovAudit monotonicity_audit(const GameSpec& game, const Protocol& primal_protocol,
                                        const Protocol& dual_protocol, const Trajectory& trajectory,
                                        double audit_tol) {
  if (trajectory.empty()) throw ConfigError("cannot audit an empty trajectory");
  LyapunovAudit audit;
  audit.values.reserve(trajectory.size());
  for (std::size_t t = 0; t < trajectory.size(); ++t) {
    const double v = lyapunov_value(game, primal_protocol, dual_protocol, trajectory.primal[t], trajectory.dual[t]);
    if (v < -1e-12) audit.nonnegativity_ok = false;
    audit.values.push_back(v);
  }
  audit.max_increase = audit.values.size() < 2 ? 0.0 : -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t + 1 < audit.values.size(); ++t) {
    const double inc = audit.values[t + 1] - audit.values[t];
    audit.max_increase = std::max(audit.max_increase, inc);
    if (inc > audit_tol) audit.violation_steps.push_back(t);
  }
  return audit;
}

}  // namespace popdyn
