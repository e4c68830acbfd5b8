#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "urnfield/common.hpp"
#include "urnfield/pmf.hpp"
#include "urnfield/policy.hpp"
#include "urnfield/rng.hpp"
#include "urnfield/topology.hpp"

namespace urnfield {

struct UrnState {
  std::vector<Load> loads;
  Load total = 0;

  Load sum() const noexcept;
};

enum class InitKind { MultinomialUniform, BalancedRotated, ExplicitLoads };

std::string_view to_string(InitKind kind);
InitKind parse_init_kind(std::string_view name);

struct InitSpec {
  InitKind kind = InitKind::BalancedRotated;
  std::vector<Load> loads;  // ExplicitLoads only
};

/// Translation-invariant (in law) initial configuration with exactly f_n balls.
UrnState init_state(const InitSpec& init, int n, Load f_n, SplitMix64& rng);

struct SimConfig {
  TopologySpec topology;
  PolicySpec policy;
  std::optional<Load> f_n;  // defaults to round(beta * N)
  double beta = 1.0;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  std::vector<double> record_grid;  // empty: {0, horizon}
  int observed_center = 1;          // 1-based label
  InitSpec init;
  std::optional<double> average_from;  // time-average the global histogram over [t, horizon]

  Load total_balls() const;
};

/// Throws ConfigError for anything `run` would reject.
void check_config(const SimConfig& config, const Topology& topology);

struct StepResult {
  double dt = 0.0;
  int urn = 0;  // 0-based index of the emptied urn
  Load moved = 0;
};

/// Exact event-driven simulation of the redistribution chain.
///
/// All urns carry unit-rate clocks, so the next event comes after an
/// Exp(N) delay at a uniformly chosen urn. The fired urn's balls are placed
/// one by one, each independently, using the loads just before the event.
class Simulator {
 public:
  Simulator(std::shared_ptr<const Topology> topology, PolicySpec policy, UrnState state, std::uint64_t seed);

  /// Applies the pending event and schedules the next one.
  StepResult step();

  double time() const noexcept { return time_; }
  double next_event_time() const noexcept { return time_ + pending_dt_; }
  std::uint64_t event_count() const noexcept { return events_; }

  const UrnState& state() const noexcept { return state_; }
  const Topology& topology() const noexcept { return *topology_; }

  /// counts[k] = number of urns holding k balls.
  std::span<const std::uint64_t> histogram() const noexcept { return histogram_; }

  /// Empirical law of loads over the neighborhood of 0-based urn `index`.
  Pmf local_empirical(int index) const;
  Pmf global_empirical() const;

 private:
  void place_ball(int urn);

  std::shared_ptr<const Topology> topology_;
  PolicySpec policy_;
  UrnState state_;
  SplitMix64 rng_;
  double time_ = 0.0;
  double pending_dt_ = 0.0;
  std::uint64_t events_ = 0;
  std::vector<std::uint64_t> histogram_;
  std::vector<double> cumulative_;
  std::vector<Load> snapshot_;
  std::vector<int> slots_;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<Pmf> local_empirical;
  std::vector<Pmf> global_empirical;
  std::vector<double> local_mean;
  std::uint64_t event_count = 0;
  int n = 0;
  int h = 0;
  Load total = 0;
  std::optional<Pmf> time_averaged_global;

  friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

/// Points 0, step, 2 step, ... up to and including `horizon`.
std::vector<double> uniform_grid(double horizon, double step);

/// Seed used by replica `r` of an ensemble with master seed `master`.
inline std::uint64_t replica_seed(std::uint64_t master, std::uint64_t r) { return derive_seed(master, r); }

TrajectoryRecord run(const SimConfig& config);
TrajectoryRecord run(const SimConfig& config, std::shared_ptr<const Topology> topology);

/// Replicas run concurrently on up to `threads` OpenMP threads (0: default).
/// Output is identical to run_ensemble_serial.
std::vector<TrajectoryRecord> run_ensemble(const SimConfig& config, int replicas, int threads = 0);

/// Sequential reference for run_ensemble.
std::vector<TrajectoryRecord> run_ensemble_serial(const SimConfig& config, int replicas);

}  // namespace urnfield
