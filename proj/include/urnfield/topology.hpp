#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace urnfield {

// Urn labels in this header are 1-based, with the convention that
// 0 mod N is N. `Topology::neighbors_of` is the one 0-based accessor,
// used by the simulator.

enum class TopologyKind { Full, Torus, LogTorus, Explicit };

std::string_view to_string(TopologyKind kind);
TopologyKind parse_topology_kind(std::string_view name);

struct TopologySpec {
  TopologyKind kind = TopologyKind::Full;
  int n = 0;
  double alpha = 0.0;        // Torus: neighbors within floor(alpha*N) on each side
  double delta = 0.0;        // LogTorus: neighbors strictly within floor(delta*log N)
  std::vector<int> offsets;  // Explicit: the base set itself
};

struct Neighborhood {
  int center = 0;
  std::vector<int> members;  // sorted labels
  int h = 0;
};

/// Reduces any integer to a label in 1..n.
int wrap_label(long long value, int n);

/// True if `base` is a subset of {2..n} closed under k -> (n + 2 - k) mod n.
bool is_symmetric_base(std::span<const int> base, int n);

/// Sorted base offset set (neighbors of urn 1). Throws ConfigError.
std::vector<int> build_base(const TopologySpec& spec);

Neighborhood neighborhood(int center, std::span<const int> base, int n);

/// Urns j whose neighborhood meets that of `center`, computed from the
/// difference set base - base.
std::vector<int> interaction_set(int center, std::span<const int> base, int n);

/// Neighbor table materialized for every urn.
class Topology {
 public:
  explicit Topology(const TopologySpec& spec);

  int size() const noexcept { return n_; }
  int degree() const noexcept { return h_; }
  std::span<const int> base() const noexcept { return base_; }

  /// 0-based neighbor indices of 0-based urn `index`.
  std::span<const int> neighbors_of(int index) const noexcept {
    return {table_.data() + static_cast<std::size_t>(index) * h_, static_cast<std::size_t>(h_)};
  }

  Neighborhood neighborhood(int label) const;

 private:
  int n_;
  int h_;
  std::vector<int> base_;
  std::vector<int> table_;
};

}  // namespace urnfield
