#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "urnfield/engine.hpp"
#include "urnfield/experiments.hpp"
#include "urnfield/meanfield.hpp"

namespace urnfield {

// Run-config file: one JSON object. Unknown keys are rejected.
//
//   seed, threads, out_dir, format ("csv" | "json")
//   n, beta, f_n, horizon, grid_step, record_grid, replicas,
//   observed_center, average_from
//   topology     { kind: full|torus|logtorus|explicit, alpha, delta, offsets }
//   policy       { kind: random|weighted|pow, d, weights, weight_tail }
//   initializer  { kind: balanced|multinomial|explicit, loads }
//   meanfield    { initial: balanced|poisson|dirac|equilibrium, initial_load,
//                  kmax_override, tol, mckv_replicas }
//   equilibrium  { n_max, damping, fixed_point_tol, cdf_betas }
//   experiment   { name, kind: convergence|stationary|finite_support, ns,
//                  betas, burn_in, sweep: [ {n, topology, policy, beta,
//                  horizon, replicas}, ... ] }
//   metrics      { a, b, p }

enum class InitialLawKind { Balanced, Poisson, Dirac, Equilibrium };
enum class ExperimentKind { Convergence, Stationary, FiniteSupport };

struct MeanFieldParams {
  InitialLawKind initial = InitialLawKind::Balanced;
  std::optional<Load> initial_load;  // Dirac only; defaults to round(beta)
  FpControl control;
  std::size_t mckv_replicas = 0;
};

struct EquilibriumParams {
  std::size_t n_max = 1'000'000;
  double damping = 0.5;
  double fixed_point_tol = 1e-13;
  std::vector<double> cdf_betas;
};

struct ExperimentParams {
  ExperimentKind kind = ExperimentKind::Convergence;
  ExperimentSpec spec;
  std::vector<double> betas;  // finite_support
};

struct MetricsParams {
  std::string a;
  std::string b;
  double p = 2.0;
};

struct RunConfig {
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::optional<std::string> out_dir;
  std::string format = "csv";

  SimConfig sim;
  int replicas = 1;
  double grid_step = 0.5;

  MeanFieldParams meanfield;
  EquilibriumParams equilibrium;
  ExperimentParams experiment;
  MetricsParams metrics;
};

/// Validates the schema and builds a RunConfig. Throws ConfigError naming
/// the offending key path.
RunConfig parse_run_config(const nlohmann::json& config);

/// Reads and parses a JSON file; syntax errors become ConfigError("config").
nlohmann::json load_config_file(const std::string& path);

/// Sets `pointer` (e.g. "/policy/d") in `config`, creating parent objects.
void set_config_value(nlohmann::json& config, const std::string& pointer, nlohmann::json value);

}  // namespace urnfield
