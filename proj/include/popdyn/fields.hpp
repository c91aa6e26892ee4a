#pragma once

#include "popdyn/game.hpp"
#include "popdyn/protocol.hpp"

namespace popdyn {

/// Mean dynamics of a pairwise-comparison protocol for payoff vector `payoff`
/// over population state `state`:
///   ẋ_i = Σ_j ( x_j ρ(π_i − π_j) − x_i ρ(π_j − π_i) ).
/// Each unordered pair contributes one net flow, added to one side and
/// subtracted from the other, so the entries cancel pairwise.
inline Vector pairwise_comparison_field(const Protocol& protocol, const Vector& state, const Vector& payoff) {
  const Index n = state.size();
  Vector rate = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double forward = state[i] * protocol(payoff[j] - payoff[i]);  // i → j
      const double backward = state[j] * protocol(payoff[i] - payoff[j]);  // j → i
      const double net = forward - backward;
      rate[i] -= net;
      rate[j] += net;
    }
  }
  return rate;
}

/// ẋ under the primal-dual payoff f^μ.
inline Vector primal_field(const GameSpec& game, const Protocol& protocol, const Vector& x, const Vector& mu) {
  return pairwise_comparison_field(protocol, x, primal_dual_payoff(game, x, mu));
}

/// μ̇ under the constraint payoffs g(x); depends on x only through g.
inline Vector dual_field(const GameSpec& game, const Protocol& protocol, const Vector& x, const Vector& mu) {
  game.check_dual_size(mu);
  return pairwise_comparison_field(protocol, mu, constraint_values(game, x));
}

}  // namespace popdyn
