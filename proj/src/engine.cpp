#include "urnfield/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "parallel.hpp"

namespace urnfield {

Load UrnState::sum() const noexcept { return std::accumulate(loads.begin(), loads.end(), Load{0}); }

std::string_view to_string(InitKind kind) {
  switch (kind) {
    case InitKind::MultinomialUniform: return "multinomial";
    case InitKind::BalancedRotated: return "balanced";
    case InitKind::ExplicitLoads: return "explicit";
  }
  return "?";
}

InitKind parse_init_kind(std::string_view name) {
  if (name == "multinomial") return InitKind::MultinomialUniform;
  if (name == "balanced") return InitKind::BalancedRotated;
  if (name == "explicit") return InitKind::ExplicitLoads;
  throw ConfigError("initializer.kind", "unknown initializer '" + std::string(name) + "'");
}

UrnState init_state(const InitSpec& init, int n, Load f_n, SplitMix64& rng) {
  if (n < 1) throw ConfigError("n", "need at least one urn");
  if (f_n < 0) throw ConfigError("f_n", "total number of balls must be non-negative");
  UrnState state{std::vector<Load>(static_cast<std::size_t>(n), 0), f_n};
  const auto un = static_cast<std::uint64_t>(n);
  switch (init.kind) {
    case InitKind::MultinomialUniform:
      for (Load b = 0; b < f_n; ++b) ++state.loads[uniform_below(rng, un)];
      break;
    case InitKind::BalancedRotated: {
      const Load base = f_n / n;
      const Load extra = f_n % n;
      std::fill(state.loads.begin(), state.loads.end(), base);
      const std::uint64_t start = uniform_below(rng, un);
      for (Load k = 0; k < extra; ++k) ++state.loads[(start + static_cast<std::uint64_t>(k)) % un];
      break;
    }
    case InitKind::ExplicitLoads:
      if (init.loads.size() != state.loads.size())
        throw ConfigError("initializer.loads", "expected " + std::to_string(n) + " loads, got " +
                                                   std::to_string(init.loads.size()));
      if (std::any_of(init.loads.begin(), init.loads.end(), [](Load l) { return l < 0; }))
        throw ConfigError("initializer.loads", "loads must be non-negative");
      state.loads = init.loads;
      if (state.sum() != f_n)
        throw ConfigError("initializer.loads", "loads sum to " + std::to_string(state.sum()) + ", expected f_n = " +
                                                   std::to_string(f_n));
      break;
  }
  return state;
}

Load SimConfig::total_balls() const {
  if (f_n) return *f_n;
  return static_cast<Load>(std::llround(beta * topology.n));
}

void check_config(const SimConfig& config, const Topology& topology) {
  validate(config.policy, topology.degree());
  if (!(config.horizon >= 0.0) || !std::isfinite(config.horizon))
    throw ConfigError("horizon", "horizon must be finite and non-negative");
  if (!config.f_n && !(config.beta > 0.0)) throw ConfigError("beta", "beta must be positive");
  if (config.total_balls() < 0) throw ConfigError("f_n", "total number of balls must be non-negative");
  if (config.observed_center < 1 || config.observed_center > topology.size())
    throw ConfigError("observed_center", "must be an urn label in 1..N");
  const auto& grid = config.record_grid;
  if (!std::is_sorted(grid.begin(), grid.end())) throw ConfigError("record_grid", "grid must be sorted");
  if (!grid.empty() && (grid.front() < 0.0 || grid.back() > config.horizon))
    throw ConfigError("record_grid", "grid must lie in [0, horizon]");
  if (config.average_from && !(*config.average_from >= 0.0 && *config.average_from < config.horizon))
    throw ConfigError("average_from", "averaging window must start in [0, horizon)");
  if (config.init.kind == InitKind::ExplicitLoads) {
    if (config.init.loads.size() != static_cast<std::size_t>(topology.size()))
      throw ConfigError("initializer.loads", "expected one load per urn");
    if (std::accumulate(config.init.loads.begin(), config.init.loads.end(), Load{0}) != config.total_balls())
      throw ConfigError("initializer.loads", "loads do not sum to f_n");
  }
}

Simulator::Simulator(std::shared_ptr<const Topology> topology, PolicySpec policy, UrnState state, std::uint64_t seed)
    : topology_(std::move(topology)), policy_(std::move(policy)), state_(std::move(state)), rng_(seed) {
  validate(policy_, topology_->degree());
  if (state_.loads.size() != static_cast<std::size_t>(topology_->size()))
    throw ConfigError("initializer.loads", "state size does not match the topology");
  for (Load l : state_.loads) {
    if (static_cast<std::size_t>(l) >= histogram_.size()) histogram_.resize(static_cast<std::size_t>(l) + 1, 0);
    ++histogram_[static_cast<std::size_t>(l)];
  }
  slots_.resize(static_cast<std::size_t>(topology_->degree()));
  std::iota(slots_.begin(), slots_.end(), 0);
  pending_dt_ = exponential(rng_, static_cast<double>(topology_->size()));
}

void Simulator::place_ball(int urn) {
  Load& l = state_.loads[static_cast<std::size_t>(urn)];
  --histogram_[static_cast<std::size_t>(l)];
  ++l;
  if (static_cast<std::size_t>(l) >= histogram_.size()) histogram_.resize(static_cast<std::size_t>(l) + 1, 0);
  ++histogram_[static_cast<std::size_t>(l)];
}

StepResult Simulator::step() {
  const int n = topology_->size();
  StepResult result;
  result.dt = pending_dt_;
  time_ += pending_dt_;
  ++events_;
  result.urn = static_cast<int>(uniform_below(rng_, static_cast<std::uint64_t>(n)));

  Load& fired = state_.loads[static_cast<std::size_t>(result.urn)];
  const Load balls = fired;
  result.moved = balls;
  if (balls > 0) {
    --histogram_[static_cast<std::size_t>(balls)];
    ++histogram_[0];
    fired = 0;

    const std::span<const int> nbrs = topology_->neighbors_of(result.urn);
    const auto h = static_cast<std::uint64_t>(nbrs.size());
    switch (policy_.kind) {
      case PolicyKind::Random:
        for (Load b = 0; b < balls; ++b) place_ball(nbrs[uniform_below(rng_, h)]);
        break;
      case PolicyKind::Weighted: {
        cumulative_.resize(nbrs.size());
        double total = 0.0;
        for (std::size_t k = 0; k < nbrs.size(); ++k)
          cumulative_[k] = (total += policy_.weights(state_.loads[static_cast<std::size_t>(nbrs[k])]));
        for (Load b = 0; b < balls; ++b) {
          const double u = uniform01(rng_) * total;
          auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
          if (it == cumulative_.end()) --it;
          place_ball(nbrs[static_cast<std::size_t>(it - cumulative_.begin())]);
        }
        break;
      }
      case PolicyKind::PowerOfD: {
        snapshot_.resize(nbrs.size());
        for (std::size_t k = 0; k < nbrs.size(); ++k) snapshot_[k] = state_.loads[static_cast<std::size_t>(nbrs[k])];
        const auto d = static_cast<std::uint64_t>(policy_.d);
        for (Load b = 0; b < balls; ++b) {
          // Partial Fisher-Yates: slots_[0..d) becomes a uniform d-subset.
          int best = -1;
          Load best_load = 0;
          std::uint64_t ties = 0;
          for (std::uint64_t t = 0; t < d; ++t) {
            const std::uint64_t r = t + uniform_below(rng_, h - t);
            std::swap(slots_[t], slots_[r]);
            const int slot = slots_[t];
            const Load l = snapshot_[static_cast<std::size_t>(slot)];
            if (best < 0 || l < best_load) {
              best = slot;
              best_load = l;
              ties = 1;
            } else if (l == best_load && uniform_below(rng_, ++ties) == 0) {
              best = slot;
            }
          }
          place_ball(nbrs[static_cast<std::size_t>(best)]);
        }
        break;
      }
    }
  }
  pending_dt_ = exponential(rng_, static_cast<double>(n));
  return result;
}

Pmf Simulator::local_empirical(int index) const {
  const std::span<const int> nbrs = topology_->neighbors_of(index);
  std::vector<Load> sample(nbrs.size());
  for (std::size_t k = 0; k < nbrs.size(); ++k) sample[k] = state_.loads[static_cast<std::size_t>(nbrs[k])];
  return Pmf::empirical(sample);
}

Pmf Simulator::global_empirical() const { return Pmf::from_counts(histogram_); }

std::vector<double> uniform_grid(double horizon, double step) {
  if (!(step > 0.0)) throw ConfigError("grid_step", "grid step must be positive");
  std::vector<double> grid;
  const auto count = static_cast<std::size_t>(std::floor(horizon / step + 1e-9));
  for (std::size_t k = 0; k <= count; ++k) grid.push_back(std::min(horizon, static_cast<double>(k) * step));
  if (horizon - grid.back() > 1e-9 * step)
    grid.push_back(horizon);
  else
    grid.back() = horizon;
  return grid;
}

TrajectoryRecord run(const SimConfig& config) {
  return run(config, std::make_shared<const Topology>(config.topology));
}

TrajectoryRecord run(const SimConfig& config, std::shared_ptr<const Topology> topology) {
  check_config(config, *topology);
  const int n = topology->size();
  const Load total = config.total_balls();

  SplitMix64 init_rng(derive_seed(config.seed, 0));
  UrnState state = init_state(config.init, n, total, init_rng);
  Simulator sim(topology, config.policy, std::move(state), derive_seed(config.seed, 1));

  TrajectoryRecord record;
  record.n = n;
  record.h = topology->degree();
  record.total = total;
  record.times = config.record_grid.empty() ? std::vector<double>{0.0, config.horizon} : config.record_grid;
  if (config.horizon == 0.0) record.times = {0.0};

  const int center = config.observed_center - 1;
  auto observe = [&] {
    Pmf local = sim.local_empirical(center);
    record.local_mean.push_back(local.mean());
    record.local_empirical.push_back(std::move(local));
    record.global_empirical.push_back(sim.global_empirical());
  };

  const double avg_start = config.average_from.value_or(config.horizon);
  std::vector<double> occupancy;  // time-integrated histogram over the averaging window
  auto accumulate = [&](double from, double to) {
    const double lo = std::max(from, avg_start);
    const double hi = std::min(to, config.horizon);
    if (!(hi > lo)) return;
    const auto counts = sim.histogram();
    if (occupancy.size() < counts.size()) occupancy.resize(counts.size(), 0.0);
    for (std::size_t k = 0; k < counts.size(); ++k) occupancy[k] += static_cast<double>(counts[k]) * (hi - lo);
  };

  std::size_t next = 0;
  while (true) {
    const double t_next = sim.next_event_time();
    while (next < record.times.size() && record.times[next] < t_next) {
      observe();
      ++next;
    }
    if (t_next > config.horizon) break;
    if (config.average_from) accumulate(sim.time(), t_next);
    sim.step();
  }
  if (config.average_from) accumulate(sim.time(), config.horizon);

  record.event_count = sim.event_count();
  if (config.average_from) record.time_averaged_global = Pmf::from_weights(std::move(occupancy));
  return record;
}

namespace {

SimConfig replica_config(const SimConfig& config, int r) {
  SimConfig c = config;
  c.seed = replica_seed(config.seed, static_cast<std::uint64_t>(r));
  return c;
}

}  // namespace

std::vector<TrajectoryRecord> run_ensemble_serial(const SimConfig& config, int replicas) {
  if (replicas < 1) throw ConfigError("replicas", "need at least one replica");
  auto topology = std::make_shared<const Topology>(config.topology);
  std::vector<TrajectoryRecord> out;
  out.reserve(static_cast<std::size_t>(replicas));
  for (int r = 0; r < replicas; ++r) out.push_back(run(replica_config(config, r), topology));
  return out;
}

std::vector<TrajectoryRecord> run_ensemble(const SimConfig& config, int replicas, int threads) {
  if (replicas < 1) throw ConfigError("replicas", "need at least one replica");
  auto topology = std::make_shared<const Topology>(config.topology);
  check_config(config, *topology);
  std::vector<TrajectoryRecord> out(static_cast<std::size_t>(replicas));
  detail::FirstError error;
#pragma omp parallel for schedule(dynamic) num_threads(detail::resolve_threads(threads))
  for (int r = 0; r < replicas; ++r)
    error.guard([&] { out[static_cast<std::size_t>(r)] = run(replica_config(config, r), topology); });
  error.rethrow();
  return out;
}

}  // namespace urnfield
