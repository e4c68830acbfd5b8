// urnfield: command-line front end for the urn redistribution model.
//
//   urnfield simulate    finite-N event simulation (ensemble of replicas)
//   urnfield meanfield   Fokker-Planck solution, optional particle check
//   urnfield equilibrium invariant law of the mean-field dynamics
//   urnfield experiment  convergence / stationary / finite_support sweeps
//   urnfield metrics     distances between two pmfs
//
// Exit status: 0 success, 2 configuration error, 1 runtime failure.

#include <chrono>
#include <cmath>
#include <deque>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "urnfield/config.hpp"
#include "urnfield/equilibrium.hpp"
#include "urnfield/experiments.hpp"
#include "urnfield/io.hpp"
#include "urnfield/meanfield.hpp"
#include "urnfield/metrics.hpp"

#ifndef URNFIELD_VERSION
#define URNFIELD_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace urnfield;

namespace {

enum class Kind { Int, UInt, Real, Text, IntList, RealList, Json };

struct FlagDef {
  const char* flag;
  const char* pointer;
  Kind kind;
  const char* help;
};

// Flags shared by every subcommand: the model itself.
const FlagDef kModelFlags[] = {
    {"--n", "/n", Kind::Int, "number of urns N"},
    {"--topology", "/topology/kind", Kind::Text, "full | torus | logtorus | explicit"},
    {"--alpha", "/topology/alpha", Kind::Real, "torus reach as a fraction of N"},
    {"--delta", "/topology/delta", Kind::Real, "log-torus scale, reach delta*log(N)"},
    {"--offsets", "/topology/offsets", Kind::IntList, "explicit base offsets, comma separated"},
    {"--policy", "/policy/kind", Kind::Text, "random | weighted | pow"},
    {"--d", "/policy/d", Kind::Int, "number of sampled urns for pow"},
    {"--weights", "/policy/weights", Kind::RealList, "W(0),W(1),... for the weighted policy"},
    {"--weight-tail", "/policy/weight_tail", Kind::Real, "W(l) beyond the listed weights"},
    {"--beta", "/beta", Kind::Real, "mean load (balls per urn)"},
    {"--horizon", "/horizon", Kind::Real, "time horizon T"},
    {"--grid-step", "/grid_step", Kind::Real, "spacing of the output time grid"},
};

const FlagDef kSimulateFlags[] = {
    {"--f-n", "/f_n", Kind::Int, "total number of balls (default round(beta N))"},
    {"--record-grid", "/record_grid", Kind::RealList, "explicit recording times, comma separated"},
    {"--replicas", "/replicas", Kind::Int, "independent replicas"},
    {"--init", "/initializer/kind", Kind::Text, "balanced | multinomial | explicit"},
    {"--init-loads", "/initializer/loads", Kind::IntList, "loads for the explicit initializer"},
    {"--observed-center", "/observed_center", Kind::Int, "urn label whose neighborhood is recorded"},
    {"--average-from", "/average_from", Kind::Real, "time-average the global histogram from this time"},
};

const FlagDef kMeanFieldFlags[] = {
    {"--initial", "/meanfield/initial", Kind::Text, "balanced | poisson | dirac | equilibrium"},
    {"--initial-load", "/meanfield/initial_load", Kind::Int, "atom of the dirac initial law"},
    {"--kmax-override", "/meanfield/kmax_override", Kind::UInt, "number of retained states"},
    {"--tol", "/meanfield/tol", Kind::Real, "absolute integrator tolerance"},
    {"--mckv-replicas", "/meanfield/mckv_replicas", Kind::UInt, "particles for the nonlinear process check"},
};

const FlagDef kEquilibriumFlags[] = {
    {"--n-max", "/equilibrium/n_max", Kind::UInt, "cap on the xi recursion length"},
    {"--damping", "/equilibrium/damping", Kind::Real, "initial damping of the fixed-point iteration"},
    {"--fixed-point-tol", "/equilibrium/fixed_point_tol", Kind::Real, "TV tolerance of the fixed-point iteration"},
    {"--cdf-betas", "/equilibrium/cdf_betas", Kind::RealList, "betas for the scaled CDF comparison"},
};

const FlagDef kExperimentFlags[] = {
    {"--name", "/experiment/name", Kind::Text, "experiment name (run directory prefix)"},
    {"--kind", "/experiment/kind", Kind::Text, "convergence | stationary | finite_support"},
    {"--ns", "/experiment/ns", Kind::IntList, "values of N to sweep"},
    {"--betas", "/experiment/betas", Kind::RealList, "betas for finite_support"},
    {"--burn-in", "/experiment/burn_in", Kind::Real, "burn-in fraction for stationary"},
    {"--sweep", "/experiment/sweep", Kind::Json, "sweep points as a JSON array"},
    {"--replicas", "/replicas", Kind::Int, "replicas per sweep point"},
    {"--init", "/initializer/kind", Kind::Text, "balanced | multinomial"},
};

const FlagDef kMetricsFlags[] = {
    {"--a", "/metrics/a", Kind::Text, "first pmf: comma-separated probabilities or a CSV file"},
    {"--b", "/metrics/b", Kind::Text, "second pmf"},
    {"--p", "/metrics/p", Kind::Real, "Wasserstein order (reported in addition to W1, W2)"},
};

const FlagDef kGlobalFlags[] = {
    {"--seed", "/seed", Kind::UInt, "master seed (generated and recorded when absent)"},
    {"--threads", "/threads", Kind::Int, "worker threads, 0 = all cores"},
    {"--out-dir", "/out_dir", Kind::Text, "output directory"},
    {"--format", "/format", Kind::Text, "csv | json"},
};

struct Binding {
  const FlagDef* def;
  CLI::App* owner;
  CLI::Option* option = nullptr;
  std::string value;
};

std::string dotted(const std::string& pointer) {
  std::string out = pointer.substr(1);
  for (char& c : out)
    if (c == '/') c = '.';
  return out;
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');)
    if (!item.empty()) parts.push_back(item);
  return parts;
}

long long to_int(const std::string& s, const std::string& key) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw ConfigError(key, "expected an integer, got '" + s + "'");
  return v;
}

double to_real(const std::string& s, const std::string& key) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw ConfigError(key, "expected a number, got '" + s + "'");
  return v;
}

json flag_value(const Binding& b) {
  const std::string key = dotted(b.def->pointer);
  switch (b.def->kind) {
    case Kind::Int: return to_int(b.value, key);
    case Kind::UInt: {
      if (!b.value.empty() && b.value[0] == '-') throw ConfigError(key, "expected a non-negative integer");
      std::size_t used = 0;
      std::uint64_t v = 0;
      try {
        v = std::stoull(b.value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != b.value.size() || b.value.empty()) throw ConfigError(key, "expected a non-negative integer");
      return v;
    }
    case Kind::Real: return to_real(b.value, key);
    case Kind::Text: return b.value;
    case Kind::IntList: {
      json arr = json::array();
      for (const auto& s : split(b.value)) arr.push_back(to_int(s, key));
      return arr;
    }
    case Kind::RealList: {
      json arr = json::array();
      for (const auto& s : split(b.value)) arr.push_back(to_real(s, key));
      return arr;
    }
    case Kind::Json:
      try {
        return json::parse(b.value);
      } catch (const json::exception& e) {
        throw ConfigError(key, std::string("invalid JSON: ") + e.what());
      }
  }
  return nullptr;
}

template <std::size_t N>
void bind(std::deque<Binding>& out, CLI::App* app, const FlagDef (&defs)[N]) {
  for (const auto& def : defs) {
    auto& b = out.emplace_back(Binding{&def, app});
    b.option = app->add_option(def.flag, b.value, std::string(def.help) + "  [" + dotted(def.pointer) + "]");
  }
}

// Renders a CSV table as a JSON array of row objects.
json csv_to_json(const std::string& csv) {
  std::stringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream h(line);
    for (std::string col; std::getline(h, col, ',');) header.push_back(col);
  }
  json rows = json::array();
  while (std::getline(in, line)) {
    json row = json::object();
    std::stringstream cells(line);
    std::size_t c = 0;
    for (std::string cell; std::getline(cells, cell, ',') && c < header.size(); ++c) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (!cell.empty() && end == cell.c_str() + cell.size())
        row[header[c]] = v;
      else
        row[header[c]] = cell;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

struct Output {
  fs::path dir;
  std::string format;

  void table(const std::string& stem, const std::string& csv) const {
    if (format == "json")
      write_file(dir / (stem + ".json"), csv_to_json(csv).dump(1) + "\n");
    else
      write_file(dir / (stem + ".csv"), csv);
  }

  void document(const std::string& name, const json& j) const { write_file(dir / name, j.dump(2) + "\n"); }
};

template <class Fn>
std::string render(Fn&& fn) {
  std::ostringstream out;
  fn(out);
  return out.str();
}

// The output location is left out so a rerun into another directory
// produces an identical manifest.
json manifest(const std::string& subcommand, json config, std::uint64_t seed) {
  config.erase("out_dir");
  return {{"tool", "urnfield"},
          {"version", URNFIELD_VERSION},
          {"subcommand", subcommand},
          {"seed", seed},
          {"config_hash", config_hash(config)},
          {"config", config}};
}

Topology checked_topology(const RunConfig& rc) {
  Topology topology(rc.sim.topology);
  validate(rc.sim.policy, topology.degree());
  return topology;
}

Pmf mean_field_initial(const RunConfig& rc) {
  const double beta = rc.sim.beta;
  switch (rc.meanfield.initial) {
    case InitialLawKind::Balanced: return initial_law(InitKind::BalancedRotated, beta);
    case InitialLawKind::Poisson: return initial_law(InitKind::MultinomialUniform, beta);
    case InitialLawKind::Dirac:
      return Pmf::dirac(static_cast<std::size_t>(rc.meanfield.initial_load.value_or(std::llround(beta))));
    case InitialLawKind::Equilibrium: return invariant_distribution(rc.sim.policy, beta);
  }
  return {};
}

void print_head(const Pmf& pmf, std::size_t count) {
  std::cout << "load  probability\n";
  for (std::size_t k = 0; k < std::min(count, pmf.size()); ++k) std::printf("%4zu  %.12g\n", k, pmf[k]);
  if (pmf.size() > count) std::cout << " ...  (" << pmf.size() << " atoms)\n";
}

int cmd_simulate(const RunConfig& rc, const Output& out, json& summary) {
  SimConfig sim = rc.sim;
  sim.seed = *rc.seed;
  check_config(sim, checked_topology(rc));
  const auto records = run_ensemble(sim, rc.replicas, rc.threads);
  out.table("trajectory", render([&](std::ostream& os) { write_trajectory_csv(os, records); }));
  summary = trajectory_summary(records);
  std::uint64_t events = 0;
  for (const auto& r : records) events += r.event_count;
  std::cout << "replicas " << records.size() << ", events " << events << ", h " << records.front().h << "\n";
  return 0;
}

int cmd_meanfield(const RunConfig& rc, const Output& out, json& summary) {
  checked_topology(rc);
  const auto grid = uniform_grid(rc.sim.horizon, rc.grid_step);
  const Pmf pi0 = mean_field_initial(rc);
  const auto sol = solve_fp(rc.sim.policy, pi0, rc.sim.beta, grid, rc.meanfield.control);
  out.table("meanfield", render([&](std::ostream& os) { write_meanfield_csv(os, sol.times, sol.pmfs); }));
  summary = meanfield_summary(sol);
  if (rc.meanfield.mckv_replicas > 0) {
    const auto laws =
        simulate_mckv(rc.sim.policy, sol, pi0, rc.sim.beta, rc.meanfield.mckv_replicas, *rc.seed, rc.threads);
    out.table("mckv", render([&](std::ostream& os) { write_meanfield_csv(os, sol.times, laws); }));
    summary["mckv_replicas"] = rc.meanfield.mckv_replicas;
    summary["mckv_sup_tv"] = sup_time_tv(laws, sol.pmfs);
  }
  std::cout << "truncation " << sol.truncation << ", steps " << sol.stats.accepted_steps << " accepted / "
            << sol.stats.rejected_steps << " rejected, final mean " << sol.pmfs.back().mean() << "\n";
  return 0;
}

int cmd_equilibrium(const RunConfig& rc, const Output& out, json& summary) {
  checked_topology(rc);
  const PolicySpec& policy = rc.sim.policy;
  const double beta = rc.sim.beta;
  Pmf pmf;
  summary = {{"beta", beta}, {"policy", std::string(to_string(policy.kind))}};
  if (policy.kind == PolicyKind::PowerOfD) {
    const auto eq = invariant_power_of_d(beta, policy.d, rc.equilibrium.n_max);
    pmf = eq.pmf;
    out.table("xi", render([&](std::ostream& os) { write_xi_csv(os, eq.xi); }));
    summary["d"] = policy.d;
    summary["xi_residual"] = eq.xi.max_residual();
    summary["xi_tail_sum"] = eq.xi.tail_sum();
    std::vector<double> betas = rc.equilibrium.cdf_betas;
    if (betas.empty()) betas.push_back(beta);
    const auto fs = finite_support_demo(betas, policy.d);
    out.table("scaled_cdf", render([&](std::ostream& os) { write_finite_support_csv(os, fs); }));
    json gaps = json::array();
    for (const auto& s : fs.summaries)
      gaps.push_back({{"beta", s.beta}, {"gap", s.gap}, {"mass_above_edge", s.mass_above_edge}});
    summary["scaled_cdf_gap"] = gaps;
  } else if (policy.kind == PolicyKind::Weighted) {
    const auto eq = invariant_weighted(policy.weights, beta);
    pmf = eq.pmf;
    summary["gamma"] = eq.gamma;
    summary["gamma_residual"] = eq.residual;
  } else {
    pmf = invariant_random(beta);
  }

  try {
    const auto fp = fixed_point_iterate(policy, beta, invariant_random(beta),
                                        {rc.equilibrium.damping, rc.equilibrium.fixed_point_tol});
    summary["fixed_point"] = {{"converged", true},
                              {"iterations", fp.iterations},
                              {"residual", fp.residual},
                              {"tv_to_closed_form", tv(fp.pmf, pmf)}};
  } catch (const NonConvergence& e) {
    summary["fixed_point"] = {{"converged", false}, {"residual", e.residual()}};
  }

  const auto gen = generator_apply(policy, pmf.probs(), beta);
  double gen_sup = 0.0;
  for (double g : gen) gen_sup = std::max(gen_sup, std::abs(g));
  const auto tail = geometric_tail_bound_check(pmf, beta, psi_sup(policy));
  summary["mean"] = pmf.mean();
  summary["balance_residual"] = balance_residual(policy, beta, pmf);
  summary["generator_sup"] = gen_sup;
  summary["tail_bound_holds"] = tail.holds;
  summary["tail_bound_violation"] = tail.max_violation;
  summary["support_size"] = pmf.size();

  out.table("equilibrium", render([&](std::ostream& os) { write_pmf_csv(os, pmf); }));
  print_head(pmf, 10);
  std::cout << "mean " << pmf.mean() << ", balance residual " << summary["balance_residual"].get<double>() << "\n";
  if (summary.contains("gamma")) std::cout << "gamma " << summary["gamma"].get<double>() << "\n";
  if (summary.contains("xi_residual"))
    std::cout << "xi residual " << summary["xi_residual"].get<double>() << ", sum xi "
              << summary["xi_tail_sum"].get<double>() << "\n";
  return 0;
}

int cmd_experiment(const RunConfig& rc, Output& out, json& summary) {
  ExperimentSpec spec = rc.experiment.spec;
  spec.seed = *rc.seed;
  if (spec.init == InitKind::ExplicitLoads)
    throw ConfigError("initializer.kind", "experiments need balanced or multinomial initial loads");
  out.dir = run_directory(out.dir, spec.name, spec.seed);
  spec.output = out.dir;
  summary = {{"name", spec.name}};
  switch (rc.experiment.kind) {
    case ExperimentKind::Convergence: {
      for (const auto& p : spec.sweep) validate(p.policy, Topology(p.topology).degree());
      const auto rows = mean_field_convergence(spec);
      out.table("convergence", render([&](std::ostream& os) { write_convergence_csv(os, rows); }));
      summary["kind"] = "convergence";
      summary["rows"] = rows.size();
      for (const auto& r : rows)
        std::cout << "N " << r.n << "  combined " << r.combined_mean << " +- " << r.combined_se << "\n";
      break;
    }
    case ExperimentKind::Stationary: {
      for (const auto& p : spec.sweep) validate(p.policy, Topology(p.topology).degree());
      const auto rows = stationary_comparison(spec);
      out.table("stationary", render([&](std::ostream& os) { write_stationary_csv(os, rows); }));
      summary["kind"] = "stationary";
      summary["rows"] = rows.size();
      for (const auto& r : rows) std::cout << "N " << r.n << "  tv " << r.tv_mean << " +- " << r.tv_se << "\n";
      break;
    }
    case ExperimentKind::FiniteSupport: {
      const int d = rc.sim.policy.kind == PolicyKind::PowerOfD ? rc.sim.policy.d : 2;
      const auto result = finite_support_demo(rc.experiment.betas, d);
      out.table("finite_support", render([&](std::ostream& os) { write_finite_support_csv(os, result); }));
      summary["kind"] = "finite_support";
      json gaps = json::array();
      for (const auto& s : result.summaries) {
        gaps.push_back({{"beta", s.beta},
                        {"gap", s.gap},
                        {"mass_above_edge", s.mass_above_edge},
                        {"quantile_999", s.quantile_999}});
        std::cout << "beta " << s.beta << "  gap " << s.gap << "\n";
      }
      summary["d"] = d;
      summary["summaries"] = gaps;
      break;
    }
  }
  return 0;
}

int cmd_metrics(const RunConfig& rc, json& summary) {
  if (rc.metrics.a.empty()) throw ConfigError("metrics.a", "missing pmf");
  if (rc.metrics.b.empty()) throw ConfigError("metrics.b", "missing pmf");
  const Pmf a = parse_pmf(rc.metrics.a);
  const Pmf b = parse_pmf(rc.metrics.b);
  summary = to_json(distance_report(a, b));
  summary["p"] = rc.metrics.p;
  summary["wp"] = wasserstein(a, b, rc.metrics.p);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"urnfield: urn redistribution model, mean-field limit and equilibria"};
  app.require_subcommand(1);
  app.set_version_flag("--version", URNFIELD_VERSION);

  std::string config_path;
  std::deque<Binding> bindings;
  app.add_option("--config", config_path, "JSON run-config file");
  bind(bindings, &app, kGlobalFlags);

  auto* simulate = app.add_subcommand("simulate", "simulate the finite-N urn system");
  auto* meanfield = app.add_subcommand("meanfield", "integrate the mean-field Fokker-Planck equation");
  auto* equilibrium = app.add_subcommand("equilibrium", "invariant law of the mean-field dynamics");
  auto* experiment = app.add_subcommand("experiment", "run a convergence, stationary or finite_support sweep");
  auto* metrics = app.add_subcommand("metrics", "TV and Wasserstein distances between two pmfs");
  for (auto* sub : {simulate, meanfield, equilibrium, experiment, metrics}) sub->fallthrough();
  for (auto* sub : {simulate, meanfield, equilibrium, experiment}) bind(bindings, sub, kModelFlags);
  bind(bindings, simulate, kSimulateFlags);
  bind(bindings, meanfield, kMeanFieldFlags);
  bind(bindings, equilibrium, kEquilibriumFlags);
  bind(bindings, experiment, kExperimentFlags);
  bind(bindings, metrics, kMetricsFlags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  CLI::App* active = app.get_subcommands().front();
  const std::string name = active->get_name();

  try {
    json config = config_path.empty() ? json::object() : load_config_file(config_path);
    if (!config.is_object()) throw ConfigError("config", "expected a JSON object");
    for (const auto& b : bindings)
      if (b.option->count() > 0) set_config_value(config, b.def->pointer, flag_value(b));
    if (!config.contains("seed")) {
      std::random_device entropy;
      config["seed"] = (std::uint64_t{entropy()} << 32) | entropy();
    }

    const RunConfig rc = parse_run_config(config);
    Output out{fs::path(rc.out_dir.value_or("urnfield-out")), rc.format};
    json summary;
    const auto start = std::chrono::steady_clock::now();
    int code = 0;
    if (name == "simulate") code = cmd_simulate(rc, out, summary);
    else if (name == "meanfield") code = cmd_meanfield(rc, out, summary);
    else if (name == "equilibrium") code = cmd_equilibrium(rc, out, summary);
    else if (name == "experiment") code = cmd_experiment(rc, out, summary);
    else if (name == "metrics") return cmd_metrics(rc, summary);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    out.document("summary.json", summary);
    out.document("manifest.json", manifest(name, config, *rc.seed));
    out.document("timing.json", {{"runtime_seconds", seconds}, {"threads", rc.threads}});
    std::cout << "seed " << *rc.seed << ", output in " << out.dir.string() << "\n";
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
