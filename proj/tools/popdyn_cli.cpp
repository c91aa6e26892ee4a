// popdyn: simulate, verify and reproduce primal-dual evolutionary dynamics.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 no convergence
// within the horizon, 3 acceptance failure (or a state outside E for verify).

#include "popdyn/io.hpp"
#include "popdyn/popdyn.hpp"
#include "popdyn/repro.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace popdyn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNoConvergence = 2;
constexpr int kExitAcceptance = 3;

fs::path output_root() {
  if (const char* dir = std::getenv("POPDYN_OUT_DIR"); dir != nullptr && *dir != '\0') return fs::path(dir);
  return fs::path(".");
}

Vector parse_vector(const std::string& text, const std::string& flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(flag + ": '" + item + "' is not a number");
    }
  }
  if (values.empty()) throw ConfigError(flag + " is empty");
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

Protocol protocol_by_name(const std::string& name) {
  if (auto p = find_protocol(name)) return *p;
  throw ConfigError("unknown protocol '" + name + "'");
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

fs::path seeded_path(const fs::path& base, std::uint64_t seed) {
  fs::path p = base;
  p.replace_filename(base.stem().string() + "_seed" + std::to_string(seed) + base.extension().string());
  return p;
}

// ---------------------------------------------------------------------------

struct SimulateOptions {
  std::string game = "paper-congestion";
  std::string protocol = "smith";
  std::string dual_protocol;
  double step = 0.01;
  double horizon = 200.0;
  double tol = 1e-6;
  std::size_t window = 100;
  std::string integrator = "euler";
  std::uint64_t seed = 0;
  std::string seeds;
  std::string init = "random";
  std::string x0;
  std::string mu0;
  std::string out;
  std::string state_out;
  std::size_t record_every = 1;
  double report_tol = 1e-3;
};

struct InitialCondition {
  PrimalState x;
  DualState mu;
};

InitialCondition initial_condition(const GameSpec& game, const SimulateOptions& o, std::uint64_t seed) {
  std::optional<PrimalState> x;
  std::optional<DualState> mu;
  if (o.init == "paper") {
    if (o.game == "paper-rps") {
      x = PrimalState::barycenter(game.n(), game.primal_mass());
      mu = game.dual_state((Vector(2) << game.dual_mass(), 0.0).finished());
    }
  } else if (o.init != "random") {
    throw ConfigError("--init must be 'random' or 'paper'");
  }
  if (!o.x0.empty()) x = game.primal_state(parse_vector(o.x0, "--x0"));
  if (!o.mu0.empty()) mu = game.dual_state(parse_vector(o.mu0, "--mu0"));
  if (!x) x = sample_simplex(game.n(), game.primal_mass(), seed);
  if (!mu) mu = game.null_dual_state();
  return {*x, *mu};
}

SimParams sim_params(const SimulateOptions& o, std::uint64_t seed) {
  SimParams p;
  p.step = o.step;
  p.horizon = o.horizon;
  p.convergence_tol = o.tol;
  p.convergence_window = o.window;
  p.seed = seed;
  if (o.integrator == "euler") {
    p.integrator = Integrator::Euler;
  } else if (o.integrator == "rk4") {
    p.integrator = Integrator::RK4;
  } else {
    throw ConfigError("--integrator must be euler or rk4");
  }
  p.validate();
  return p;
}

struct RunOutcome {
  io::ordered_json summary;
  bool converged = false;
};

RunOutcome run_one(const GameSpec& game, const SimulateOptions& o, std::uint64_t seed, const fs::path& out_path,
                   const std::optional<fs::path>& state_path) {
  const Protocol primal = protocol_by_name(o.protocol);
  const Protocol dual = protocol_by_name(o.dual_protocol.empty() ? o.protocol : o.dual_protocol);
  const auto init = initial_condition(game, o, seed);
  const Trajectory traj = integrate(game, primal, dual, init.x, init.mu, sim_params(o, seed));

  {
    auto out = open_output(out_path);
    io::write_trajectory_csv(out, game, traj, o.record_every);
  }
  const Vector& x = traj.final_primal();
  const Vector& mu = traj.final_dual();
  if (state_path) {
    auto out = open_output(*state_path);
    out << io::state_to_json(x, mu).dump(2) << '\n';
  }

  const auto& last = traj.diagnostics.back();
  io::ordered_json s;
  s["seed"] = seed;
  s["converged"] = traj.converged;
  s["steps"] = traj.size() - 1;
  s["final_time"] = traj.times.back();
  s["xdot_norm"] = last.primal_field_norm;
  s["mudot_norm"] = last.dual_field_norm;
  s["V"] = last.lyapunov;
  s["x"] = io::to_json_array(x);
  s["mu"] = io::to_json_array(mu);
  s["trajectory"] = out_path.string();
  s["report"] = io::report_to_json(in_equilibria_set(game, x, mu, o.report_tol));
  return {std::move(s), traj.converged};
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw ConfigError("--seeds expects a range a..b");
  try {
    const auto a = std::stoull(text.substr(0, dots));
    const auto b = std::stoull(text.substr(dots + 2));
    if (b < a) throw ConfigError("--seeds range is empty");
    return {a, b};
  } catch (const std::logic_error&) {
    throw ConfigError("--seeds expects a range a..b of nonnegative integers");
  }
}

int cmd_simulate(const SimulateOptions& o) {
  const GameSpec game = io::load_game(o.game);
  const fs::path out = o.out.empty() ? output_root() / "trajectory.csv" : fs::path(o.out);

  if (o.seeds.empty()) {
    const std::optional<fs::path> state = o.state_out.empty() ? std::nullopt : std::optional<fs::path>(o.state_out);
    auto outcome = run_one(game, o, o.seed, out, state);
    std::cout << outcome.summary.dump(2) << '\n';
    return outcome.converged ? kExitOk : kExitNoConvergence;
  }

  const auto [first, last] = parse_seed_range(o.seeds);
  std::vector<std::future<RunOutcome>> runs;
  for (std::uint64_t seed = first; seed <= last; ++seed) {
    runs.push_back(std::async(std::launch::async, [&, seed] {
      const std::optional<fs::path> state =
          o.state_out.empty() ? std::nullopt : std::optional<fs::path>(seeded_path(o.state_out, seed));
      return run_one(game, o, seed, seeded_path(out, seed), state);
    }));
  }
  bool all_converged = true;
  auto batch = io::ordered_json::array();
  for (auto& run : runs) {
    auto outcome = run.get();
    all_converged = all_converged && outcome.converged;
    batch.push_back(std::move(outcome.summary));
  }
  std::cout << batch.dump(2) << '\n';
  return all_converged ? kExitOk : kExitNoConvergence;
}

// ---------------------------------------------------------------------------

int cmd_verify(const std::string& game_source, const std::string& state_file, double tol) {
  const GameSpec game = io::load_game(game_source);
  const auto state = io::state_from_json(game, io::read_json_file(state_file));
  const auto report = in_equilibria_set(game, state.x, state.mu, tol);
  std::cout << io::report_to_json(report).dump(2) << '\n';
  return report.in_equilibria_set ? kExitOk : kExitAcceptance;
}

// ---------------------------------------------------------------------------

int cmd_bound(const std::string& game_source, const std::string& slater_text, std::optional<double> p_star_upper,
              int resolution, int iters) {
  const GameSpec game = io::load_game(game_source);
  const SlaterPoint slater(game, parse_vector(slater_text, "--slater"));

  io::ordered_json j;
  double upper = 0.0;
  if (p_star_upper) {
    upper = *p_star_upper;
    j["p_star_source"] = "user";
  } else {
    const auto oracle = oracle_solve(game, resolution, iters, 0);
    upper = oracle.value + oracle.gap;
    j["p_star_source"] = "oracle";
    j["oracle_value"] = oracle.value;
    j["oracle_gap"] = oracle.gap;
  }
  const double bound = dual_mass_bound(game, slater, upper);
  j["p_star_upper"] = upper;
  j["p_slater"] = potential(game, slater.point());
  j["slater_margin"] = slater.margin();
  j["bound"] = bound;
  j["dual_mass"] = game.dual_mass();
  j["sufficient"] = game.dual_mass() >= bound;
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_repro(const std::string& experiment, std::uint64_t seed, const std::string& out_dir_flag,
              std::size_t record_every) {
  if (experiment != "congestion" && experiment != "rps") {
    throw ConfigError("experiment must be 'congestion' or 'rps'");
  }
  const fs::path dir = out_dir_flag.empty() ? output_root() / ("repro-" + experiment) : fs::path(out_dir_flag);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory '" + dir.string() + "'");
  {
    // Fail early on unwritable directories, before the simulation runs.
    std::ofstream probe(dir / "report.json");
    if (!probe) throw ConfigError("output directory '" + dir.string() + "' is not writable");
  }

  const ReproResult result = experiment == "congestion" ? repro_congestion(seed) : repro_rps();

  {
    auto out = open_output(dir / "trajectory.csv");
    io::write_trajectory_csv(out, result.game, result.trajectory, record_every);
  }
  {
    auto out = open_output(dir / "lyapunov_audit.json");
    out << io::audit_to_json(result.audit, repro_thresholds::kAuditTol).dump(2) << '\n';
  }
  {
    auto out = open_output(dir / "state.json");
    out << io::state_to_json(result.trajectory.final_primal(), result.trajectory.final_dual()).dump(2) << '\n';
  }
  io::ordered_json report;
  report["experiment"] = experiment;
  report["seed"] = seed;
  report["steps"] = result.trajectory.size() - 1;
  report["converged"] = result.trajectory.converged;
  report["x"] = io::to_json_array(result.trajectory.final_primal());
  report["mu"] = io::to_json_array(result.trajectory.final_dual());
  report["equilibrium"] = io::report_to_json(result.report);
  if (result.oracle) {
    report["oracle"] = {{"x", io::to_json_array(result.oracle->x)},
                        {"value", result.oracle->value},
                        {"gap", result.oracle->gap}};
  }
  auto criteria = io::ordered_json::array();
  for (const auto& c : result.criteria) {
    io::ordered_json item;
    item["name"] = c.name;
    item["passed"] = c.passed;
    item["detail"] = c.detail;
    criteria.push_back(std::move(item));
  }
  report["criteria"] = std::move(criteria);
  report["passed"] = result.passed();
  {
    auto out = open_output(dir / "report.json");
    out << report.dump(2) << '\n';
  }

  for (const auto& c : result.criteria) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
  }
  if (!result.passed()) {
    std::cerr << "failed criteria:";
    for (const auto& c : result.criteria) {
      if (!c.passed) std::cerr << ' ' << c.name;
    }
    std::cerr << '\n';
    return kExitAcceptance;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Primal-dual evolutionary dynamics for constrained population games"};
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "integrate the primal-dual dynamics and write a trajectory CSV");
  simulate->add_option("--game", sim.game, "builtin name (paper-congestion, paper-rps) or game JSON path");
  simulate->add_option("--protocol", sim.protocol, "revision protocol (smith, saturating)");
  simulate->add_option("--dual-protocol", sim.dual_protocol, "dual population protocol (default: --protocol)");
  simulate->add_option("--step", sim.step, "integration step in seconds");
  simulate->add_option("--horizon", sim.horizon, "simulated seconds");
  simulate->add_option("--tol", sim.tol, "convergence tolerance on the field norms");
  simulate->add_option("--window", sim.window, "consecutive quiet steps required for convergence");
  simulate->add_option("--integrator", sim.integrator, "euler or rk4");
  simulate->add_option("--seed", sim.seed, "seed for the random initial state");
  simulate->add_option("--seeds", sim.seeds, "batch range a..b, one run and file per seed");
  simulate->add_option("--init", sim.init, "initial-condition policy: random or paper");
  simulate->add_option("--x0", sim.x0, "explicit primal state, comma separated");
  simulate->add_option("--mu0", sim.mu0, "explicit dual state, comma separated");
  simulate->add_option("--out", sim.out, "trajectory CSV path");
  simulate->add_option("--state-out", sim.state_out, "write the final (x, mu) as JSON");
  simulate->add_option("--record-every", sim.record_every, "keep every N-th state in the CSV");
  simulate->add_option("--report-tol", sim.report_tol, "tolerance of the final equilibrium report");

  std::string verify_game;
  std::string verify_state;
  double verify_tol = 1e-3;
  auto* verify = app.add_subcommand("verify", "check whether a state lies in the equilibria set");
  verify->add_option("--game", verify_game, "builtin name or game JSON path")->required();
  verify->add_option("--state", verify_state, "JSON file with x and mu")->required();
  verify->add_option("--tol", verify_tol, "Nash test tolerance");

  std::string bound_game;
  std::string bound_slater;
  std::optional<double> bound_pstar;
  int bound_resolution = repro_thresholds::kOracleResolution;
  int bound_iters = repro_thresholds::kOracleRefineIters;
  auto* bound = app.add_subcommand("bound", "dual-mass bound from a Slater point");
  bound->add_option("--game", bound_game, "builtin name or game JSON path")->required();
  bound->add_option("--slater", bound_slater, "strictly feasible interior point, comma separated")->required();
  bound->add_option("--p-star-upper", bound_pstar, "certified upper bound on the optimal potential");
  bound->add_option("--oracle-resolution", bound_resolution, "grid resolution when p* comes from the oracle");
  bound->add_option("--oracle-iters", bound_iters, "refinement iterations when p* comes from the oracle");

  std::string experiment;
  std::uint64_t repro_seed = 0;
  std::string repro_dir;
  std::size_t repro_every = 1;
  auto* repro = app.add_subcommand("repro", "run a reference experiment and check its thresholds");
  repro->add_option("experiment", experiment, "congestion or rps")->required();
  repro->add_option("--seed", repro_seed, "seed for the congestion initial state");
  repro->add_option("--out-dir", repro_dir, "output directory");
  repro->add_option("--record-every", repro_every, "keep every N-th state in the CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*verify) return cmd_verify(verify_game, verify_state, verify_tol);
    if (*bound) return cmd_bound(bound_game, bound_slater, bound_pstar, bound_resolution, bound_iters);
    if (*repro) return cmd_repro(experiment, repro_seed, repro_dir, repro_every);
  } catch (const SlaterError& e) {
    std::cerr << "error: Slater condition violated";
    if (e.index() > 0) std::cerr << " by constraint " << e.index();
    std::cerr << ": " << e.what() << '\n';
    return kExitError;
  } catch (const popdyn::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
