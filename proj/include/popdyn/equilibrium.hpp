#pragma once

#include "popdyn/game.hpp"

#include <cstdint>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

namespace popdyn {

struct NashCheck {
  bool holds = false;
  double residual = 0.0;
};

/// Support optimality of `state` against `payoff`: every strategy carrying
/// more than `tol` mass must earn within `tol` of the best payoff.
inline NashCheck support_optimality(const Vector& state, const Vector& payoff, double tol) {
  const double best = payoff.maxCoeff();
  double residual = 0.0;
  for (Index i = 0; i < state.size(); ++i) {
    if (state[i] > tol) residual = std::max(residual, best - payoff[i]);
  }
  return {residual <= tol, residual};
}

/// x ∈ NE(f^μ, μ)
inline NashCheck is_primal_nash(const GameSpec& game, const Vector& x, const Vector& mu, double tol = 1e-9) {
  return support_optimality(x, primal_dual_payoff(game, x, mu), tol);
}

/// μ ∈ NE(g, x)
inline NashCheck is_dual_nash(const GameSpec& game, const Vector& mu, const Vector& x, double tol = 1e-9) {
  game.check_dual_size(mu);
  return support_optimality(mu, constraint_values(game, x), tol);
}

struct EquilibriumReport {
  double primal_nash_residual = 0.0;
  double dual_nash_residual = 0.0;
  double feasibility_residual = 0.0;      // max(0, max_k g_k(x))
  double complementarity_residual = 0.0;  // max_{k≥1} μ_k·max(−g_k(x), 0)
  /// First-order saddle gap: max of  m_P·max_j f^μ_j − xᵀf^μ  and  m_D·max_k g_k − μᵀg.
  /// For a concave Lagrangian these bound max_y L(y,μ) − L(x,μ) and L(x,μ) − min_ν L(x,ν).
  double saddle_violation = 0.0;
  bool in_equilibria_set = false;
  double tolerance = 0.0;
  Vector multipliers;  // λ_k = μ_k for k = 1..q
};

inline EquilibriumReport in_equilibria_set(const GameSpec& game, const Vector& x, const Vector& mu,
                                           double tol = 1e-9) {
  const Vector payoff = primal_dual_payoff(game, x, mu);
  const Vector g = constraint_values(game, x);
  const NashCheck primal = support_optimality(x, payoff, tol);
  const NashCheck dual = support_optimality(mu, g, tol);

  EquilibriumReport r;
  r.primal_nash_residual = primal.residual;
  r.dual_nash_residual = dual.residual;
  r.feasibility_residual = std::max(0.0, g.maxCoeff());
  for (Index k = 1; k < g.size(); ++k) {
    r.complementarity_residual = std::max(r.complementarity_residual, mu[k] * std::max(-g[k], 0.0));
  }
  const double primal_gap = std::max(0.0, game.primal_mass() * payoff.maxCoeff() - x.dot(payoff));
  const double dual_gap = std::max(0.0, game.dual_mass() * g.maxCoeff() - mu.dot(g));
  r.saddle_violation = std::max(primal_gap, dual_gap);
  r.in_equilibria_set = primal.holds && dual.holds;
  r.tolerance = tol;
  r.multipliers = mu.tail(game.q());
  return r;
}

// ---------------------------------------------------------------------------

/// A strictly positive simplex point at which every constraint holds strictly.
class SlaterPoint {
public:
  SlaterPoint(const GameSpec& game, Vector x) : x_(game.primal_state(std::move(x))) {
    for (Index i = 0; i < x_.size(); ++i) {
      if (!(x_[i] > 0.0)) {
        throw SlaterError(-1, "Slater point entry " + std::to_string(i + 1) + " is not strictly positive");
      }
    }
    const Vector g = constraint_values(game, x_);
    margin_ = std::numeric_limits<double>::infinity();
    for (Index k = 1; k < g.size(); ++k) {
      if (!(g[k] < 0.0)) {
        throw SlaterError(static_cast<long>(k), "constraint " + std::to_string(k) +
                                                    " is not strictly satisfied at the Slater point (g = " +
                                                    std::to_string(g[k]) + ")");
      }
      margin_ = std::min(margin_, -g[k]);
    }
  }

  const PrimalState& point() const noexcept { return x_; }
  /// min_k |g_k(x̃)|; infinite for an unconstrained game.
  double margin() const noexcept { return margin_; }

private:
  PrimalState x_;
  double margin_ = 0.0;
};

/// Smallest dual mass that the dual-mass sufficient condition certifies:
///   (p* − p(x̃)) / min_k |g_k(x̃)|,
/// with p* replaced by the certified upper bound `p_star_upper`.
inline double dual_mass_bound(const GameSpec& game, const SlaterPoint& slater, double p_star_upper) {
  const double p_tilde = potential(game, slater.point());
  if (p_star_upper < p_tilde) {
    throw ConfigError("p_star_upper is below p at the Slater point, so it cannot bound the optimum");
  }
  if (!(slater.margin() > 0.0)) throw SlaterError(0, "Slater margin is not positive");
  if (std::isinf(slater.margin())) return 0.0;
  return (p_star_upper - p_tilde) / slater.margin();
}

// ---------------------------------------------------------------------------

struct OracleResult {
  Vector x;              // best feasible point found
  double value = 0.0;    // p at x
  double gap = 0.0;      // p-variation over the final search neighborhood
  std::size_t grid_points = 0;
  std::size_t feasible_grid_points = 0;
};

namespace detail {

inline constexpr double kOracleFeasibilityTol = 1e-12;

inline bool oracle_feasible(const GameSpec& game, const Vector& x) {
  for (const auto& c : game.constraints()) {
    if (evaluate(c, x) > kOracleFeasibilityTol) return false;
  }
  return true;
}

/// Visits every composition of `total` into `parts` nonnegative integers in
/// lexicographic order.
inline void for_each_composition(int parts, int total, const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> counts(static_cast<std::size_t>(parts), 0);
  std::function<void(int, int)> rec = [&](int pos, int remaining) {
    if (pos == parts - 1) {
      counts[static_cast<std::size_t>(pos)] = remaining;
      visit(counts);
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[static_cast<std::size_t>(pos)] = c;
      rec(pos + 1, remaining - c);
    }
  };
  rec(0, total);
}

}  // namespace detail

/// Brute-force maximizer of p over the feasible part of Δ_P. Uses only p and
/// the constraint values, never payoffs or the dynamics.
///
/// Phase 1 scans the grid of compositions of m_P into n parts at `resolution`.
/// Phase 2 runs a feasibility-filtered random local search with mass-preserving
/// moves (pairwise transfers and random tangent directions) and a shrinking step.
inline OracleResult oracle_solve(const GameSpec& game, int resolution, int refine_iters, std::uint64_t seed) {
  if (!game.has_potential()) throw UnsupportedError("oracle_solve needs a potential function");
  if (game.n() > 6) throw ConfigError("oracle_solve supports at most 6 strategies");
  if (resolution < 1) throw ConfigError("oracle resolution must be positive");

  const Index n = game.n();
  const double mass = game.primal_mass();
  OracleResult best;
  best.value = -std::numeric_limits<double>::infinity();
  Vector x(n);
  detail::for_each_composition(static_cast<int>(n), resolution, [&](const std::vector<int>& counts) {
    ++best.grid_points;
    for (Index i = 0; i < n; ++i) x[i] = mass * counts[static_cast<std::size_t>(i)] / resolution;
    if (!detail::oracle_feasible(game, x)) return;
    ++best.feasible_grid_points;
    const double v = potential(game, x);
    if (v > best.value) {
      best.value = v;
      best.x = x;
    }
  });
  if (best.feasible_grid_points == 0) {
    throw InfeasibleError("no feasible grid point at resolution " + std::to_string(resolution) +
                          "; raise the resolution");
  }

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> pick(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  double step = mass / resolution;
  const int patience = static_cast<int>(4 * n * n);
  int failures = 0;

  auto propose = [&](const Vector& from, double radius) {
    Vector y = from;
    if (unit(rng) < 0.5) {
      const Index i = pick(rng);
      Index j = pick(rng);
      while (j == i) j = pick(rng);
      const double amount = std::min(radius * unit(rng), y[i]);
      y[i] -= amount;
      y[j] += amount;
    } else {
      Vector z(n);
      for (Index i = 0; i < n; ++i) z[i] = normal(rng);
      z.array() -= z.mean();
      const double len = z.norm();
      if (len > 0.0) y += (radius * unit(rng) / len) * z;
    }
    return y;
  };
  auto admissible = [&](const Vector& y) {
    return (y.array() >= 0.0).all() && detail::oracle_feasible(game, y);
  };

  for (int it = 0; it < refine_iters; ++it) {
    const Vector y = propose(best.x, step);
    if (admissible(y)) {
      const double v = potential(game, y);
      if (v > best.value) {
        best.value = v;
        best.x = y;
        failures = 0;
        continue;
      }
    }
    if (++failures >= patience) {
      step *= 0.5;
      failures = 0;
    }
  }

  // Spread of p over admissible neighbors at the final radius.
  for (int s = 0; s < 8 * patience; ++s) {
    const Vector y = propose(best.x, step);
    if (admissible(y)) best.gap = std::max(best.gap, std::abs(potential(game, y) - best.value));
  }
  return best;
}

struct SaddleViolation {
  double primal = 0.0;  // max_x L(x, μ*) − L(x*, μ*), floored at 0
  double dual = 0.0;    // max_μ L(x*, μ*) − L(x*, μ), floored at 0
  bool degenerate = false;
};

/// Sampled check of L(x, μ*) ≤ L(x*, μ*) ≤ L(x*, μ) over random x ∈ Δ_P, μ ∈ Δ_D.
inline SaddleViolation saddle_check(const GameSpec& game, const Vector& x_star, const Vector& mu_star, int samples,
                                    std::uint64_t seed) {
  SaddleViolation out;
  if (samples <= 0) {
    out.degenerate = true;
    std::clog << "warning: saddle_check called with no samples; reporting zero violations\n";
    return out;
  }
  const double center = lagrangian(game, x_star, mu_star);
  std::mt19937_64 rng(seed);
  for (int s = 0; s < samples; ++s) {
    const Vector x = sample_simplex_values(game.n(), game.primal_mass(), rng);
    const Vector mu = sample_simplex_values(game.q() + 1, game.dual_mass(), rng);
    out.primal = std::max(out.primal, lagrangian(game, x, mu_star) - center);
    out.dual = std::max(out.dual, center - lagrangian(game, x_star, mu));
  }
  return out;
}

}  // namespace popdyn
