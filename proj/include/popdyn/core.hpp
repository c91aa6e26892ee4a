#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace popdyn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Absolute slack on the total mass of a population state.
inline constexpr double kSimplexTolerance = 1e-9;

/// Central finite-difference step used wherever an analytic derivative is missing.
inline constexpr double kFiniteDifferenceStep = 1e-6;

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed game, state or parameter.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Operation requested on a game that lacks the needed structure (e.g. no potential).
class UnsupportedError : public Error {
public:
  using Error::Error;
};

class DivergedError : public Error {
public:
  DivergedError(std::size_t step, const std::string& what)
      : Error("integration diverged at step " + std::to_string(step) + ": " + what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

private:
  std::size_t step_;
};

class SlaterError : public Error {
public:
  SlaterError(long index, const std::string& what) : Error(what), index_(index) {}
  /// Offending constraint index (1-based), or -1 when an entry of the point is not positive.
  long index() const noexcept { return index_; }

private:
  long index_;
};

class InfeasibleError : public Error {
public:
  using Error::Error;
};

class NumericError : public Error {
public:
  using Error::Error;
};

inline double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace popdyn
