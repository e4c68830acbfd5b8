#include "urnfield/config.hpp"

#include <fstream>
#include <numeric>
#include <set>

namespace urnfield {

namespace {

using nlohmann::json;

// Strict view of one JSON object: every key must be read exactly once.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_.empty() ? "config" : path_, "expected a JSON object");
  }

  ~Section() = default;

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key);
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& at(const std::string& key) {
    seen_.insert(key);
    return node_.at(key);
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return convert<T>(node_.at(key), key_path(key));
  }

  template <class T>
  std::optional<T> maybe(const std::string& key) {
    if (!has(key) || node_.at(key).is_null()) return std::nullopt;
    return convert<T>(node_.at(key), key_path(key));
  }

  std::optional<Section> child(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return Section(node_.at(key), key_path(key));
  }

  void finish() const {
    for (const auto& [key, value] : node_.items())
      if (!seen_.contains(key)) throw ConfigError(key_path(key), "unknown key");
  }

 private:
  template <class T>
  static T convert(const json& value, const std::string& path) {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!value.is_number()) throw ConfigError(path, "expected a number");
      } else if constexpr (std::is_integral_v<T>) {
        if (!value.is_number_integer()) throw ConfigError(path, "expected an integer");
        if constexpr (std::is_unsigned_v<T>)
          if (value.is_number_integer() && !value.is_number_unsigned() && value.get<long long>() < 0)
            throw ConfigError(path, "expected a non-negative integer");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!value.is_string()) throw ConfigError(path, "expected a string");
      }
      return value.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path, std::string("bad value: ") + e.what());
    }
  }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

TopologySpec read_topology(Section& top, int n, const TopologySpec& fallback) {
  TopologySpec spec = fallback;
  spec.n = n;
  if (auto s = top.child("topology")) {
    if (s->has("kind")) spec.kind = parse_topology_kind(s->get<std::string>("kind", ""));
    spec.alpha = s->get<double>("alpha", spec.alpha);
    spec.delta = s->get<double>("delta", spec.delta);
    spec.offsets = s->get<std::vector<int>>("offsets", spec.offsets);
    s->finish();
  }
  return spec;
}

PolicySpec read_policy(Section& top, const PolicySpec& fallback) {
  PolicySpec spec = fallback;
  if (auto s = top.child("policy")) {
    if (s->has("kind")) spec.kind = parse_policy_kind(s->get<std::string>("kind", ""));
    spec.d = s->get<int>("d", spec.d);
    const bool has_weights = s->has("weights");
    const bool has_tail = s->has("weight_tail");
    if (has_weights || has_tail) {
      auto values = s->get<std::vector<double>>("weights", std::vector<double>(spec.weights.values().begin(),
                                                                               spec.weights.values().end()));
      const double tail = s->get<double>("weight_tail", spec.weights.tail_value());
      spec.weights = WeightTable(std::move(values), tail);
    }
    s->finish();
  }
  if (spec.kind == PolicyKind::PowerOfD && spec.d < 2) throw ConfigError("policy.d", "d must be at least 2");
  return spec;
}

InitialLawKind parse_initial_law(const std::string& name) {
  if (name == "balanced") return InitialLawKind::Balanced;
  if (name == "poisson") return InitialLawKind::Poisson;
  if (name == "dirac") return InitialLawKind::Dirac;
  if (name == "equilibrium") return InitialLawKind::Equilibrium;
  throw ConfigError("meanfield.initial", "unknown initial law '" + name + "'");
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  if (name == "convergence") return ExperimentKind::Convergence;
  if (name == "stationary") return ExperimentKind::Stationary;
  if (name == "finite_support") return ExperimentKind::FiniteSupport;
  throw ConfigError("experiment.kind", "unknown experiment '" + name + "'");
}

}  // namespace

RunConfig parse_run_config(const nlohmann::json& config) {
  Section top(config, "");
  RunConfig rc;
  rc.seed = top.maybe<std::uint64_t>("seed");
  rc.threads = top.get<int>("threads", 0);
  if (rc.threads < 0) throw ConfigError("threads", "must be non-negative");
  rc.out_dir = top.maybe<std::string>("out_dir");
  rc.format = top.get<std::string>("format", "csv");
  if (rc.format != "csv" && rc.format != "json") throw ConfigError("format", "expected csv or json");

  const int n = top.get<int>("n", 100);
  SimConfig& sim = rc.sim;
  sim.topology = read_topology(top, n, {});
  sim.policy = read_policy(top, {});
  sim.beta = top.get<double>("beta", 2.0);
  if (!(sim.beta > 0.0)) throw ConfigError("beta", "beta must be positive");
  sim.f_n = top.maybe<Load>("f_n");
  sim.horizon = top.get<double>("horizon", 10.0);
  if (!(sim.horizon >= 0.0)) throw ConfigError("horizon", "horizon must be non-negative");
  rc.grid_step = top.get<double>("grid_step", 0.5);
  if (!(rc.grid_step > 0.0)) throw ConfigError("grid_step", "grid step must be positive");
  sim.record_grid = top.get<std::vector<double>>("record_grid", {});
  if (sim.record_grid.empty()) sim.record_grid = uniform_grid(sim.horizon, rc.grid_step);
  rc.replicas = top.get<int>("replicas", 1);
  if (rc.replicas < 1) throw ConfigError("replicas", "need at least one replica");
  sim.observed_center = top.get<int>("observed_center", 1);
  sim.average_from = top.maybe<double>("average_from");
  if (auto s = top.child("initializer")) {
    sim.init.kind = parse_init_kind(s->get<std::string>("kind", "balanced"));
    sim.init.loads = s->get<std::vector<Load>>("loads", {});
    s->finish();
  }
  if (sim.init.kind == InitKind::ExplicitLoads && !sim.f_n)
    sim.f_n = std::accumulate(sim.init.loads.begin(), sim.init.loads.end(), Load{0});

  if (auto s = top.child("meanfield")) {
    auto& mf = rc.meanfield;
    mf.initial = parse_initial_law(s->get<std::string>("initial", "balanced"));
    mf.initial_load = s->maybe<Load>("initial_load");
    if (mf.initial_load && *mf.initial_load < 0) throw ConfigError("meanfield.initial_load", "must be non-negative");
    mf.control.kmax_override = s->maybe<std::size_t>("kmax_override");
    mf.control.tol = s->get<double>("tol", mf.control.tol);
    if (!(mf.control.tol > 0.0)) throw ConfigError("meanfield.tol", "tolerance must be positive");
    mf.mckv_replicas = s->get<std::size_t>("mckv_replicas", 0);
    s->finish();
  }

  if (auto s = top.child("equilibrium")) {
    auto& eq = rc.equilibrium;
    eq.n_max = s->get<std::size_t>("n_max", eq.n_max);
    eq.damping = s->get<double>("damping", eq.damping);
    if (!(eq.damping > 0.0 && eq.damping <= 1.0)) throw ConfigError("equilibrium.damping", "must lie in (0, 1]");
    eq.fixed_point_tol = s->get<double>("fixed_point_tol", eq.fixed_point_tol);
    eq.cdf_betas = s->get<std::vector<double>>("cdf_betas", {});
    s->finish();
  }

  auto& ex = rc.experiment;
  ex.spec.seed = rc.seed.value_or(1);
  ex.spec.grid_step = rc.grid_step;
  ex.spec.threads = rc.threads;
  ex.spec.init = sim.init.kind;
  std::vector<int> ns;
  if (auto s = top.child("experiment")) {
    ex.spec.name = s->get<std::string>("name", ex.spec.name);
    ex.kind = parse_experiment_kind(s->get<std::string>("kind", "convergence"));
    ns = s->get<std::vector<int>>("ns", {});
    ex.betas = s->get<std::vector<double>>("betas", {});
    ex.spec.burn_in = s->get<double>("burn_in", ex.spec.burn_in);
    if (s->has("sweep")) {
      const json& list = s->at("sweep");
      if (!list.is_array()) throw ConfigError("experiment.sweep", "expected an array");
      for (std::size_t i = 0; i < list.size(); ++i) {
        Section item(list[i], "experiment.sweep[" + std::to_string(i) + "]");
        SweepPoint p;
        const int pn = item.get<int>("n", n);
        p.topology = read_topology(item, pn, sim.topology);
        p.policy = read_policy(item, sim.policy);
        p.beta = item.get<double>("beta", sim.beta);
        p.horizon = item.get<double>("horizon", sim.horizon);
        p.replicas = item.get<int>("replicas", rc.replicas);
        item.finish();
        ex.spec.sweep.push_back(std::move(p));
      }
    }
    s->finish();
  }
  if (ex.spec.sweep.empty()) {
    if (ns.empty()) ns.push_back(n);
    for (int pn : ns) {
      SweepPoint p{sim.topology, sim.policy, sim.beta, sim.horizon, rc.replicas};
      p.topology.n = pn;
      ex.spec.sweep.push_back(std::move(p));
    }
  }
  if (ex.betas.empty()) ex.betas = {10.0, 50.0, 150.0};

  if (auto s = top.child("metrics")) {
    rc.metrics.a = s->get<std::string>("a", "");
    rc.metrics.b = s->get<std::string>("b", "");
    rc.metrics.p = s->get<double>("p", 2.0);
    if (!(rc.metrics.p >= 1.0)) throw ConfigError("metrics.p", "p must be at least 1");
    s->finish();
  }

  top.finish();
  return rc;
}

nlohmann::json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
}

void set_config_value(nlohmann::json& config, const std::string& pointer, nlohmann::json value) {
  config[nlohmann::json::json_pointer(pointer)] = std::move(value);
}

}  // namespace urnfield
