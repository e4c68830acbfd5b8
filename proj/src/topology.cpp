#include "urnfield/topology.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "urnfield/common.hpp"

namespace urnfield {

std::string_view to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::Full: return "full";
    case TopologyKind::Torus: return "torus";
    case TopologyKind::LogTorus: return "logtorus";
    case TopologyKind::Explicit: return "explicit";
  }
  return "?";
}

TopologyKind parse_topology_kind(std::string_view name) {
  if (name == "full") return TopologyKind::Full;
  if (name == "torus") return TopologyKind::Torus;
  if (name == "logtorus") return TopologyKind::LogTorus;
  if (name == "explicit") return TopologyKind::Explicit;
  throw ConfigError("topology.kind", "unknown topology '" + std::string(name) + "'");
}

int wrap_label(long long value, int n) {
  long long r = value % n;
  if (r <= 0) r += n;
  return static_cast<int>(r);
}

bool is_symmetric_base(std::span<const int> base, int n) {
  std::set<int> members(base.begin(), base.end());
  if (members.size() != base.size()) return false;
  for (int k : members) {
    if (k < 2 || k > n) return false;
    if (!members.contains(wrap_label(n + 2LL - k, n))) return false;
  }
  return true;
}

namespace {

// Offsets j in [-reach, reach] \ {0} mapped to labels 1 + j, minus label 1.
std::vector<int> ring_base(int reach, int n) {
  std::set<int> labels;
  for (int j = -reach; j <= reach; ++j) {
    const int label = wrap_label(1LL + j, n);
    if (label != 1) labels.insert(label);
  }
  return {labels.begin(), labels.end()};
}

}  // namespace

std::vector<int> build_base(const TopologySpec& spec) {
  const int n = spec.n;
  if (n < 3) throw ConfigError("n", "need at least 3 urns, got " + std::to_string(n));
  std::vector<int> base;
  switch (spec.kind) {
    case TopologyKind::Full:
      for (int k = 2; k <= n; ++k) base.push_back(k);
      break;
    case TopologyKind::Torus: {
      if (!(spec.alpha > 0.0 && spec.alpha < 1.0))
        throw ConfigError("topology.alpha", "alpha must lie in (0,1)");
      // Guard against alpha*N landing a hair below an integer.
      const int reach = static_cast<int>(std::floor(spec.alpha * n + 1e-9));
      if (reach < 1) throw ConfigError("topology.alpha", "floor(alpha*N) must be at least 1");
      base = ring_base(reach, n);
      break;
    }
    case TopologyKind::LogTorus: {
      if (!(spec.delta > 0.0)) throw ConfigError("topology.delta", "delta must be positive");
      const int bound = static_cast<int>(std::floor(spec.delta * std::log(static_cast<double>(n)) + 1e-9));
      if (bound < 2) throw ConfigError("topology.delta", "floor(delta*log N) must be at least 2");
      base = ring_base(bound - 1, n);
      break;
    }
    case TopologyKind::Explicit:
      base = spec.offsets;
      std::sort(base.begin(), base.end());
      if (base.empty()) throw ConfigError("topology.offsets", "empty base set");
      if (std::find(base.begin(), base.end(), 1) != base.end())
        throw ConfigError("topology.offsets", "offset 1 (self) is not allowed");
      if (!is_symmetric_base(base, n))
        throw ConfigError("topology.offsets", "base set is not symmetric under k -> N+2-k mod N");
      break;
  }
  if (base.empty()) throw ConfigError("topology", "empty base set");
  return base;
}

Neighborhood neighborhood(int center, std::span<const int> base, int n) {
  Neighborhood nb;
  nb.center = center;
  nb.members.reserve(base.size());
  for (int j : base) nb.members.push_back(wrap_label(static_cast<long long>(center) + j - 1, n));
  std::sort(nb.members.begin(), nb.members.end());
  nb.h = static_cast<int>(nb.members.size());
  return nb;
}

std::vector<int> interaction_set(int center, std::span<const int> base, int n) {
  // H(j) = H(center) shifted by j - center, so they meet iff the shift is a
  // difference of two base offsets.
  std::vector<bool> hit(static_cast<std::size_t>(n) + 1, false);
  for (int a : base)
    for (int b : base) hit[static_cast<std::size_t>(wrap_label(static_cast<long long>(center) + a - b, n))] = true;
  std::vector<int> out;
  for (int j = 1; j <= n; ++j)
    if (hit[static_cast<std::size_t>(j)]) out.push_back(j);
  return out;
}

Topology::Topology(const TopologySpec& spec) : n_(spec.n), base_(build_base(spec)) {
  h_ = static_cast<int>(base_.size());
  table_.resize(static_cast<std::size_t>(n_) * h_);
  for (int i = 0; i < n_; ++i)
    for (int k = 0; k < h_; ++k)
      table_[static_cast<std::size_t>(i) * h_ + k] = wrap_label(static_cast<long long>(i) + base_[k], n_) - 1;
}

Neighborhood Topology::neighborhood(int label) const {
  return urnfield::neighborhood(label, base_, n_);
}

}  // namespace urnfield
