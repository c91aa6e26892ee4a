#pragma once

#include "popdyn/core.hpp"
#include "popdyn/simplex.hpp"

#include <functional>
#include <optional>
#include <sstream>
#include <variant>
#include <vector>

namespace popdyn {

// ---------------------------------------------------------------------------
// Constraints g_k(x) ≤ 0, k = 1..q. The null constraint g_0 ≡ 0 is never stored.

/// aᵀx − b ≤ 0
struct AffineConstraint {
  Vector a;
  double b = 0.0;
};

/// xᵀQx + aᵀx − c ≤ 0 with Q symmetric positive semidefinite.
struct QuadraticConstraint {
  Matrix Q;
  Vector a;
  double c = 0.0;
};

using ConstraintSpec = std::variant<AffineConstraint, QuadraticConstraint>;

inline double evaluate(const ConstraintSpec& spec, const Vector& x) {
  return std::visit(
      [&](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, AffineConstraint>) {
          return g.a.dot(x) - g.b;
        } else {
          return x.dot(g.Q * x) + g.a.dot(x) - g.c;
        }
      },
      spec);
}

inline Vector gradient(const ConstraintSpec& spec, const Vector& x) {
  return std::visit(
      [&](const auto& g) -> Vector {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, AffineConstraint>) {
          return g.a;
        } else {
          return 2.0 * (g.Q * x) + g.a;
        }
      },
      spec);
}

inline Matrix hessian(const ConstraintSpec& spec, Index n) {
  return std::visit(
      [&](const auto& g) -> Matrix {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, AffineConstraint>) {
          return Matrix::Zero(n, n);
        } else {
          return 2.0 * g.Q;
        }
      },
      spec);
}

// ---------------------------------------------------------------------------
// Fitness rules

/// f(x) = A x. No potential is attached even when A happens to be symmetric.
struct LinearFitness {
  Matrix A;
};

/// p(x) = ½ xᵀHx + cᵀx, f(x) = Hx + c.
struct QuadraticPotentialFitness {
  Matrix H;
  Vector c;
};

/// Linear-cost congestion: road usage u = R x, p(x) = −Σ_k (b_k/2) u_k², f = ∇p.
struct CongestionFitness {
  Matrix incidence;  // roads × strategies, entries in {0, 1}
  Vector weights;    // b_k > 0
};

/// Arbitrary fitness; the Jacobian falls back to central differences.
struct CustomFitness {
  std::function<Vector(const Vector&)> fitness;
  std::function<double(const Vector&)> potential;  // empty when the game has none
};

using FitnessRule = std::variant<LinearFitness, QuadraticPotentialFitness, CongestionFitness, CustomFitness>;

// ---------------------------------------------------------------------------

/// A constrained population game: fitness rule, constraints, and the masses of
/// the primal (strategy) and dual (constraint-pricing) populations.
class GameSpec {
public:
  GameSpec(Index n, double primal_mass, double dual_mass, FitnessRule fitness,
           std::vector<ConstraintSpec> constraints = {})
      : n_(n),
        primal_mass_(primal_mass),
        dual_mass_(dual_mass),
        fitness_(std::move(fitness)),
        constraints_(std::move(constraints)) {
    validate();
  }

  Index n() const noexcept { return n_; }
  Index q() const noexcept { return static_cast<Index>(constraints_.size()); }
  double primal_mass() const noexcept { return primal_mass_; }
  double dual_mass() const noexcept { return dual_mass_; }
  const FitnessRule& fitness_rule() const noexcept { return fitness_; }
  const std::vector<ConstraintSpec>& constraints() const noexcept { return constraints_; }

  bool has_potential() const noexcept {
    if (const auto* custom = std::get_if<CustomFitness>(&fitness_)) return static_cast<bool>(custom->potential);
    return !std::holds_alternative<LinearFitness>(fitness_);
  }

  GameSpec with_dual_mass(double dual_mass) const {
    return GameSpec(n_, primal_mass_, dual_mass, fitness_, constraints_);
  }

  PrimalState primal_state(Vector x) const {
    check_primal_size(x);
    return PrimalState(std::move(x), primal_mass_);
  }
  DualState dual_state(Vector mu) const {
    check_dual_size(mu);
    return DualState(std::move(mu), dual_mass_);
  }
  /// Dual mass concentrated on the null strategy.
  DualState null_dual_state() const { return DualState::vertex(q() + 1, 0, dual_mass_); }

  void check_primal_size(const Vector& x) const {
    if (x.size() != n_) {
      std::ostringstream os;
      os << "primal vector has length " << x.size() << ", game has " << n_ << " strategies";
      throw ConfigError(os.str());
    }
  }
  void check_dual_size(const Vector& mu) const {
    if (mu.size() != q() + 1) {
      std::ostringstream os;
      os << "dual vector has length " << mu.size() << ", game expects q+1 = " << q() + 1;
      throw ConfigError(os.str());
    }
  }

private:
  void validate() const {
    if (n_ < 2) throw ConfigError("a game needs at least two strategies");
    if (!(primal_mass_ > 0.0) || !std::isfinite(primal_mass_)) throw ConfigError("primal mass must be positive");
    if (!(dual_mass_ > 0.0) || !std::isfinite(dual_mass_)) throw ConfigError("dual mass must be positive");

    std::visit(
        [&](const auto& rule) {
          using T = std::decay_t<decltype(rule)>;
          if constexpr (std::is_same_v<T, LinearFitness>) {
            if (rule.A.rows() != n_ || rule.A.cols() != n_) throw ConfigError("fitness matrix must be n×n");
          } else if constexpr (std::is_same_v<T, QuadraticPotentialFitness>) {
            if (rule.H.rows() != n_ || rule.H.cols() != n_ || rule.c.size() != n_) {
              throw ConfigError("quadratic potential needs an n×n H and a length-n c");
            }
            if ((rule.H - rule.H.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
              throw ConfigError("quadratic potential H must be symmetric");
            }
          } else if constexpr (std::is_same_v<T, CongestionFitness>) {
            if (rule.incidence.cols() != n_ || rule.incidence.rows() != rule.weights.size()) {
              throw ConfigError("congestion incidence must be roads×n with one weight per road");
            }
          } else {
            if (!rule.fitness) throw ConfigError("custom fitness rule has no fitness function");
          }
        },
        fitness_);

    for (std::size_t k = 0; k < constraints_.size(); ++k) {
      const auto label = "constraint " + std::to_string(k + 1);
      std::visit(
          [&](const auto& g) {
            using T = std::decay_t<decltype(g)>;
            if (g.a.size() != n_) throw ConfigError(label + ": coefficient vector must have length n");
            if constexpr (std::is_same_v<T, QuadraticConstraint>) {
              if (g.Q.rows() != n_ || g.Q.cols() != n_) throw ConfigError(label + ": Q must be n×n");
              if ((g.Q - g.Q.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
                throw ConfigError(label + ": Q must be symmetric");
              }
              Eigen::SelfAdjointEigenSolver<Matrix> eig(g.Q, Eigen::EigenvaluesOnly);
              if (eig.eigenvalues().minCoeff() < -1e-10) {
                throw ConfigError(label + ": Q is not positive semidefinite, constraint is not convex");
              }
            }
          },
          constraints_[k]);
    }
  }

  Index n_;
  double primal_mass_;
  double dual_mass_;
  FitnessRule fitness_;
  std::vector<ConstraintSpec> constraints_;
};

// ---------------------------------------------------------------------------
// Payoff algebra. These are defined on the whole orthant (and beyond, for
// finite differences), so they take plain vectors; states convert implicitly.

inline Vector fitness(const GameSpec& game, const Vector& x) {
  game.check_primal_size(x);
  return std::visit(
      [&](const auto& rule) -> Vector {
        using T = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<T, LinearFitness>) {
          return rule.A * x;
        } else if constexpr (std::is_same_v<T, QuadraticPotentialFitness>) {
          return rule.H * x + rule.c;
        } else if constexpr (std::is_same_v<T, CongestionFitness>) {
          const Vector usage = rule.incidence * x;
          return -(rule.incidence.transpose() * rule.weights.cwiseProduct(usage));
        } else {
          Vector f = rule.fitness(x);
          if (f.size() != game.n()) throw ConfigError("custom fitness returned a vector of the wrong length");
          return f;
        }
      },
      game.fitness_rule());
}

inline double potential(const GameSpec& game, const Vector& x) {
  game.check_primal_size(x);
  if (!game.has_potential()) throw UnsupportedError("game has no potential function");
  return std::visit(
      [&](const auto& rule) -> double {
        using T = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<T, QuadraticPotentialFitness>) {
          return 0.5 * x.dot(rule.H * x) + rule.c.dot(x);
        } else if constexpr (std::is_same_v<T, CongestionFitness>) {
          const Vector usage = rule.incidence * x;
          return -0.5 * rule.weights.dot(usage.cwiseProduct(usage));
        } else if constexpr (std::is_same_v<T, CustomFitness>) {
          return rule.potential(x);
        } else {
          return kNaN;  // unreachable: guarded by has_potential
        }
      },
      game.fitness_rule());
}

/// g(x) ∈ ℝ^{q+1}; entry 0 is the null constraint and is exactly zero.
inline Vector constraint_values(const GameSpec& game, const Vector& x) {
  game.check_primal_size(x);
  Vector g(game.q() + 1);
  g[0] = 0.0;
  for (Index k = 1; k <= game.q(); ++k) g[k] = evaluate(game.constraints()[static_cast<std::size_t>(k - 1)], x);
  return g;
}

/// Dg ∈ ℝ^{(q+1)×n}; row 0 is zero.
inline Matrix constraint_jacobian(const GameSpec& game, const Vector& x) {
  game.check_primal_size(x);
  Matrix J = Matrix::Zero(game.q() + 1, game.n());
  for (Index k = 1; k <= game.q(); ++k) {
    J.row(k) = gradient(game.constraints()[static_cast<std::size_t>(k - 1)], x).transpose();
  }
  return J;
}

/// f^μ(x, μ) = f(x) − Σ_k μ_k ∇g_k(x).
inline Vector primal_dual_payoff(const GameSpec& game, const Vector& x, const Vector& mu) {
  game.check_dual_size(mu);
  Vector f = fitness(game, x);
  for (Index k = 1; k <= game.q(); ++k) {
    if (mu[k] != 0.0) f -= mu[k] * gradient(game.constraints()[static_cast<std::size_t>(k - 1)], x);
  }
  return f;
}

/// L(x, μ) = p(x) − Σ_k μ_k g_k(x).
inline double lagrangian(const GameSpec& game, const Vector& x, const Vector& mu) {
  game.check_dual_size(mu);
  return potential(game, x) - mu.dot(constraint_values(game, x));
}

inline Matrix finite_difference_jacobian(const std::function<Vector(const Vector&)>& fn, const Vector& x,
                                         double step = kFiniteDifferenceStep) {
  const Vector f0 = fn(x);
  Matrix J(f0.size(), x.size());
  Vector xp = x;
  for (Index j = 0; j < x.size(); ++j) {
    xp[j] = x[j] + step;
    const Vector fp = fn(xp);
    xp[j] = x[j] - step;
    const Vector fm = fn(xp);
    xp[j] = x[j];
    J.col(j) = (fp - fm) / (2.0 * step);
  }
  return J;
}

inline Vector finite_difference_gradient(const std::function<double(const Vector&)>& fn, const Vector& x,
                                         double step = kFiniteDifferenceStep) {
  Vector grad(x.size());
  Vector xp = x;
  for (Index j = 0; j < x.size(); ++j) {
    xp[j] = x[j] + step;
    const double fp = fn(xp);
    xp[j] = x[j] - step;
    const double fm = fn(xp);
    xp[j] = x[j];
    grad[j] = (fp - fm) / (2.0 * step);
  }
  return grad;
}

/// Df(x); analytic for the matrix-based rules, central differences otherwise.
inline Matrix fitness_jacobian(const GameSpec& game, const Vector& x) {
  game.check_primal_size(x);
  return std::visit(
      [&](const auto& rule) -> Matrix {
        using T = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<T, LinearFitness>) {
          return rule.A;
        } else if constexpr (std::is_same_v<T, QuadraticPotentialFitness>) {
          return rule.H;
        } else if constexpr (std::is_same_v<T, CongestionFitness>) {
          return -(rule.incidence.transpose() * rule.weights.asDiagonal() * rule.incidence);
        } else {
          return finite_difference_jacobian([&](const Vector& y) { return fitness(game, y); }, x);
        }
      },
      game.fitness_rule());
}

/// Df^μ = Df − Σ_k μ_k ∇²g_k.
inline Matrix primal_dual_jacobian(const GameSpec& game, const Vector& x, const Vector& mu) {
  game.check_dual_size(mu);
  Matrix J = fitness_jacobian(game, x);
  for (Index k = 1; k <= game.q(); ++k) {
    if (mu[k] != 0.0) J -= mu[k] * hessian(game.constraints()[static_cast<std::size_t>(k - 1)], game.n());
  }
  return J;
}

/// Largest ‖∇p(x) − f(x)‖_∞ over random simplex states, ∇p by central differences.
inline double potential_gradient_error(const GameSpec& game, int samples, std::uint64_t seed) {
  if (!game.has_potential()) throw UnsupportedError("game has no potential function");
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vector x = sample_simplex_values(game.n(), game.primal_mass(), rng);
    const Vector grad = finite_difference_gradient([&](const Vector& y) { return potential(game, y); }, x);
    worst = std::max(worst, inf_norm(grad - fitness(game, x)));
  }
  return worst;
}

struct StableGameVerdict {
  bool stable = false;
  double worst = 0.0;  // max over samples of zᵀ Df(x) z with ‖z‖ = 1, 1ᵀz = 0
};

/// Tangent-space negative semidefiniteness of Df, probed at random states and
/// random unit directions z with Σ z_i = 0.
inline StableGameVerdict check_stable_game(const GameSpec& game, int samples, std::uint64_t seed) {
  if (samples < 1) throw ConfigError("stable-game check needs at least one sample");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const Vector x = sample_simplex_values(game.n(), game.primal_mass(), rng);
    Vector z(game.n());
    for (Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
    z.array() -= z.mean();
    const double len = z.norm();
    if (len == 0.0) continue;
    z /= len;
    worst = std::max(worst, z.dot(fitness_jacobian(game, x) * z));
  }
  return {worst <= 1e-9, worst};
}

}  // namespace popdyn
