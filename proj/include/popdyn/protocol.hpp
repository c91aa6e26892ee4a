#pragma once

#include "popdyn/core.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace popdyn {

namespace detail {

inline double simpson(double fa, double fm, double fb, double a, double b) { return (b - a) / 6.0 * (fa + 4.0 * fm + fb); }

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                               double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(fa, flm, fm, a, m);
  const double right = simpson(fm, frm, fb, m, b);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth <= 0) {
    throw NumericError("adaptive Simpson quadrature did not converge on [" + std::to_string(a) + ", " +
                       std::to_string(b) + "]");
  }
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// ∫_a^b f(t) dt by adaptive Simpson to absolute tolerance `tol`.
inline double integrate_simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-10,
                                int max_depth = 50) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  return detail::adaptive_simpson(f, a, b, fa, fm, fb, detail::simpson(fa, fm, fb, a, b), tol, max_depth);
}

/// Impartial pairwise-comparison revision protocol: the switching rate toward a
/// strategy depends only on the payoff advantage α, through `value(α)`, which
/// is positive for α > 0 and zero otherwise.
struct Protocol {
  std::string name;
  std::function<double(double)> value;
  /// ∫_0^α value(τ) dτ in closed form; empty when only quadrature is available.
  std::function<double(double)> antiderivative;

  double operator()(double advantage) const { return value(advantage); }

  double integral(double advantage) const {
    if (advantage <= 0.0) return 0.0;
    if (antiderivative) return antiderivative(advantage);
    return integrate_simpson(value, 0.0, advantage);
  }
};

/// ρ(α) = max(α, 0), giving the Smith dynamics.
inline Protocol smith_protocol() {
  return Protocol{"smith", [](double a) { return std::max(a, 0.0); },
                  [](double a) {
                    const double p = std::max(a, 0.0);
                    return 0.5 * p * p;
                  }};
}

/// ρ(α) = tanh(max(α, 0)): a saturating rate. No closed-form antiderivative is
/// registered, so Lyapunov values go through quadrature.
inline Protocol saturating_protocol() {
  return Protocol{"saturating", [](double a) { return std::tanh(std::max(a, 0.0)); }, {}};
}

inline std::vector<std::string> protocol_names() { return {"smith", "saturating"}; }

inline std::optional<Protocol> find_protocol(std::string_view name) {
  if (name == "smith") return smith_protocol();
  if (name == "saturating") return saturating_protocol();
  return std::nullopt;
}

/// Number of grid nodes where the sign conditions fail.
/// The conditions are value(α) > 0 for α > 0 and value(α) = 0 for α ≤ 0.
inline std::size_t sign_condition_failures(const Protocol& protocol, double lo = -10.0, double hi = 10.0,
                                           std::size_t points = 10001) {
  std::size_t failures = 0;
  for (std::size_t i = 0; i < points; ++i) {
    const double a = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    const double v = protocol.value(a);
    const bool ok = a > 0.0 ? v > 0.0 : v == 0.0;
    if (!ok) ++failures;
  }
  return failures;
}

/// Largest |value(b) − value(a)| / |b − a| between neighboring grid nodes.
inline double max_difference_quotient(const Protocol& protocol, double lo = -10.0, double hi = 10.0,
                                      std::size_t points = 10001) {
  double worst = 0.0;
  double prev_a = lo;
  double prev_v = protocol.value(lo);
  for (std::size_t i = 1; i < points; ++i) {
    const double a = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    const double v = protocol.value(a);
    worst = std::max(worst, std::abs(v - prev_v) / (a - prev_a));
    prev_a = a;
    prev_v = v;
  }
  return worst;
}

}  // namespace popdyn
