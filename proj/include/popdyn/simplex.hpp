#pragma once

#include "popdyn/core.hpp"

#include <cstdint>
#include <random>
#include <sstream>

namespace popdyn {

/// A nonnegative vector whose entries sum to a fixed population mass.
///
/// Construction validates the simplex invariants; afterwards the value is
/// immutable. The tag keeps primal and dual states from being mixed up.
template <class Tag>
class SimplexPoint {
public:
  SimplexPoint(Vector values, double mass) : values_(std::move(values)), mass_(mass) {
    if (!(mass_ > 0.0) || !std::isfinite(mass_)) {
      throw ConfigError("population mass must be positive and finite");
    }
    if (values_.size() == 0) throw ConfigError("population state must be nonempty");
    for (Index i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
        std::ostringstream os;
        os << "population state entry " << i << " = " << values_[i] << " is not a nonnegative number";
        throw ConfigError(os.str());
      }
    }
    const double drift = std::abs(values_.sum() - mass_);
    if (drift > kSimplexTolerance) {
      std::ostringstream os;
      os << "population state sums to " << values_.sum() << ", expected mass " << mass_;
      throw ConfigError(os.str());
    }
  }

  const Vector& values() const noexcept { return values_; }
  operator const Vector&() const noexcept { return values_; }  // NOLINT(google-explicit-constructor)
  double mass() const noexcept { return mass_; }
  Index size() const noexcept { return values_.size(); }
  double operator[](Index i) const { return values_[i]; }

  /// Mass concentrated on one coordinate.
  static SimplexPoint vertex(Index size, Index at, double mass) {
    Vector v = Vector::Zero(size);
    v[at] = mass;
    return SimplexPoint(std::move(v), mass);
  }

  static SimplexPoint barycenter(Index size, double mass) {
    return SimplexPoint(Vector::Constant(size, mass / static_cast<double>(size)), mass);
  }

private:
  Vector values_;
  double mass_;
};

struct PrimalTag;
struct DualTag;
using PrimalState = SimplexPoint<PrimalTag>;  // x ∈ Δ_P
using DualState = SimplexPoint<DualTag>;      // μ ∈ Δ_D, index 0 is the null strategy

/// Draws a uniform point of the mass-`mass` simplex in dimension n by
/// normalizing independent unit-exponential variates.
inline Vector sample_simplex_values(Index n, double mass, std::mt19937_64& rng) {
  if (n < 1) throw ConfigError("simplex dimension must be at least 1");
  if (n == 1) return Vector::Constant(1, mass);
  std::exponential_distribution<double> expo(1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = expo(rng);
  v *= mass / v.sum();
  return v;
}

template <class State = PrimalState>
State sample_simplex(Index n, double mass, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return State(sample_simplex_values(n, mass, rng), mass);
}

/// Clips negative entries and rescales onto the mass. Returns the size of the repair.
inline double repair_to_simplex(Vector& v, double mass) {
  double clipped = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    if (v[i] < 0.0) {
      clipped = std::max(clipped, -v[i]);
      v[i] = 0.0;
    }
  }
  const double sum = v.sum();
  const double drift = std::abs(sum - mass);
  if (drift > 1e-12 && sum > 0.0) v *= mass / sum;
  return std::max(clipped, drift);
}

}  // namespace popdyn
