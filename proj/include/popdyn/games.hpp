#pragma once

#include "popdyn/game.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace popdyn {

struct Road {
  int id = 0;
  double weight = 1.0;    // congestion cost slope b_k
  double capacity = 1.0;  // maximum usage ū_k
};

/// Roads with linear congestion costs; each strategy is a path given as a set
/// of road ids. `constraint_order` lists road ids in the order their capacity
/// constraints are numbered (empty: order of `roads`).
struct RoadNetwork {
  std::vector<Road> roads;
  std::vector<std::vector<int>> strategies;
  std::vector<int> constraint_order;
};

/// Potential −Σ_k (b_k/2) u_k(x)² with road usage u = R x, plus one affine
/// capacity constraint u_k(x) ≤ ū_k per road.
inline GameSpec build_congestion(const RoadNetwork& network, double primal_mass, double dual_mass) {
  const auto n = static_cast<Index>(network.strategies.size());
  const auto roads = static_cast<Index>(network.roads.size());
  if (roads == 0) throw ConfigError("road network has no roads");

  std::map<int, Index> row_of;
  for (Index k = 0; k < roads; ++k) {
    const Road& road = network.roads[static_cast<std::size_t>(k)];
    if (!row_of.emplace(road.id, k).second) throw ConfigError("duplicate road id " + std::to_string(road.id));
    if (!(road.weight > 0.0)) throw ConfigError("road " + std::to_string(road.id) + " needs a positive weight");
    if (!(road.capacity > 0.0) || road.capacity > primal_mass) {
      throw ConfigError("road " + std::to_string(road.id) + " capacity must lie in (0, m_P]");
    }
  }

  Matrix incidence = Matrix::Zero(roads, n);
  for (Index i = 0; i < n; ++i) {
    for (int id : network.strategies[static_cast<std::size_t>(i)]) {
      const auto it = row_of.find(id);
      if (it == row_of.end()) throw ConfigError("strategy uses unknown road " + std::to_string(id));
      incidence(it->second, i) = 1.0;
    }
  }
  Vector weights(roads);
  for (Index k = 0; k < roads; ++k) {
    if (incidence.row(k).sum() == 0.0) {
      throw ConfigError("road " + std::to_string(network.roads[static_cast<std::size_t>(k)].id) +
                        " is not used by any strategy");
    }
    weights[k] = network.roads[static_cast<std::size_t>(k)].weight;
  }

  std::vector<int> order = network.constraint_order;
  if (order.empty()) {
    for (const Road& road : network.roads) order.push_back(road.id);
  }
  if (order.size() != network.roads.size()) throw ConfigError("constraint order must list every road once");
  std::vector<ConstraintSpec> constraints;
  std::vector<bool> seen(static_cast<std::size_t>(roads), false);
  for (int id : order) {
    const auto it = row_of.find(id);
    if (it == row_of.end()) throw ConfigError("constraint order names unknown road " + std::to_string(id));
    if (seen[static_cast<std::size_t>(it->second)]) throw ConfigError("constraint order repeats road " + std::to_string(id));
    seen[static_cast<std::size_t>(it->second)] = true;
    constraints.emplace_back(AffineConstraint{incidence.row(it->second).transpose(),
                                              network.roads[static_cast<std::size_t>(it->second)].capacity});
  }

  return GameSpec(n, primal_mass, dual_mass, CongestionFitness{std::move(incidence), std::move(weights)},
                  std::move(constraints));
}

/// Eight roads, four A→B paths. Constraints are numbered single-road paths
/// first (r1, r3, r5, r6), then shared roads (r2, r7, r4, r8).
inline RoadNetwork paper_road_network() {
  RoadNetwork net;
  const double weight[] = {15, 16, 11, 13, 13, 5, 17, 18};
  const double capacity[] = {0.4, 0.6, 0.4, 0.6, 0.4, 0.4, 0.6, 0.9};
  for (int k = 0; k < 8; ++k) net.roads.push_back({k + 1, weight[k], capacity[k]});
  net.strategies = {{1, 2}, {8, 7, 3, 2}, {8, 7, 5, 4}, {8, 6, 4}};
  net.constraint_order = {1, 3, 5, 6, 2, 7, 4, 8};
  return net;
}

inline GameSpec paper_congestion_game(double dual_mass = 122.0) {
  return build_congestion(paper_road_network(), 1.0, dual_mass);
}

/// Good rock-paper-scissors, f = A x, with the coupled constraint x_1² + x_2² ≤ cap.
inline GameSpec build_rps(double primal_mass, double dual_mass, double cap) {
  if (!(cap > 0.0)) throw ConfigError("RPS constraint cap must be positive");
  Matrix A(3, 3);
  A << 0, -1, 2,  //
      2, 0, -1,   //
      -1, 2, 0;
  Matrix Q = Matrix::Zero(3, 3);
  Q(0, 0) = 1.0;
  Q(1, 1) = 1.0;
  return GameSpec(3, primal_mass, dual_mass, LinearFitness{std::move(A)},
                  {QuadraticConstraint{std::move(Q), Vector::Zero(3), cap}});
}

inline GameSpec paper_rps_game() { return build_rps(1.0, 4.0, 0.1); }

/// p = ½ xᵀHx + cᵀx with H symmetric negative semidefinite.
inline GameSpec build_quadratic_potential(const Matrix& H, const Vector& c, std::vector<ConstraintSpec> constraints,
                                          double primal_mass, double dual_mass) {
  if (H.rows() != H.cols()) throw ConfigError("H must be square");
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw ConfigError("H must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(H, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().maxCoeff() > 1e-10) {
    throw ConfigError("H is not negative semidefinite; the potential would not be concave");
  }
  return GameSpec(H.rows(), primal_mass, dual_mass, QuadraticPotentialFitness{H, c}, std::move(constraints));
}

inline GameSpec build_linear(const Matrix& A, std::vector<ConstraintSpec> constraints, double primal_mass,
                             double dual_mass) {
  return GameSpec(A.rows(), primal_mass, dual_mass, LinearFitness{A}, std::move(constraints));
}

inline std::vector<std::string> builtin_game_names() { return {"paper-congestion", "paper-rps"}; }

inline std::optional<GameSpec> builtin_game(std::string_view name) {
  if (name == "paper-congestion") return paper_congestion_game();
  if (name == "paper-rps") return paper_rps_game();
  return std::nullopt;
}

}  // namespace popdyn
