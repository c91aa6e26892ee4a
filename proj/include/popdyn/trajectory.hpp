#pragma once

#include "popdyn/core.hpp"
#include "popdyn/simplex.hpp"

#include <cstdint>
#include <functional>
#include <iostream>
#include <string_view>
#include <vector>

namespace popdyn {

enum class Integrator { Euler, RK4 };

struct SimParams {
  double step = 0.01;  // seconds
  double horizon = 200.0;
  Integrator integrator = Integrator::Euler;
  double convergence_tol = 1e-6;
  std::size_t convergence_window = 100;
  std::uint64_t seed = 0;
  /// Receives repair warnings (simplex repairs larger than 1e-6).
  std::function<void(std::string_view)> warn = [](std::string_view msg) { std::clog << "warning: " << msg << '\n'; };

  void validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("step must be positive");
    if (!(horizon >= step) || !std::isfinite(horizon)) throw ConfigError("horizon must be at least one step");
    if (!(convergence_tol > 0.0)) throw ConfigError("convergence tolerance must be positive");
    if (convergence_window < 1) throw ConfigError("convergence window must be at least one step");
  }
};

struct StepDiagnostics {
  double potential = kNaN;  // NaN when the game has no potential
  Vector constraints;       // g(x), length q+1
  double lyapunov = 0.0;
  double primal_field_norm = 0.0;  // ‖ẋ‖_∞
  double dual_field_norm = 0.0;    // ‖μ̇‖_∞
};

struct Trajectory {
  double step = 0.0;
  std::vector<double> times;
  std::vector<PrimalState> primal;
  std::vector<DualState> dual;
  std::vector<StepDiagnostics> diagnostics;
  bool converged = false;
  double max_repair = 0.0;
  std::size_t repair_warnings = 0;

  std::size_t size() const noexcept { return times.size(); }
  bool empty() const noexcept { return times.empty(); }
  const PrimalState& final_primal() const { return primal.back(); }
  const DualState& final_dual() const { return dual.back(); }
};

}  // namespace popdyn
