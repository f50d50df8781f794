#include "wcps/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "wcps/errors.hpp"

namespace wcps {

double LinkModel::probability(double distance) const {
  if (distance <= r_full) return 1.0;
  if (distance >= r_max) return 0.0;
  return (r_max - distance) / (r_max - r_full);
}

Topology::Topology(int nodes, LinkModel model)
    : n_(nodes), model_(model) {
  if (nodes < 1) throw ConfigError("topology needs at least one node");
  if (!(model.r_full >= 0.0 && model.r_max > model.r_full)) {
    throw ConfigError("link model needs 0 <= r_full < r_max");
  }
  p_.assign(static_cast<std::size_t>(nodes) * static_cast<std::size_t>(nodes), 0.0);
  positions_.assign(static_cast<std::size_t>(nodes), Position{});
}

void Topology::set_link(NodeId a, NodeId b, double p) {
  if (!contains(a) || !contains(b)) throw ConfigError("link endpoint outside topology");
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("link probability must lie in [0, 1]");
  if (a == b) return;
  p_[index(a, b)] = p;
  p_[index(b, a)] = p;
}

std::vector<NodeId> Topology::neighbors(NodeId node) const {
  std::vector<NodeId> out;
  for (NodeId j = 0; j < n_; ++j) {
    if (link(node, j) > 0.0) out.push_back(j);
  }
  return out;
}

void Topology::relink_from_geometry(NodeId node) {
  const Position& a = position(node);
  for (NodeId j = 0; j < n_; ++j) {
    if (j == node) continue;
    const Position& b = position(j);
    set_link(node, j, model_.probability(std::hypot(a.x - b.x, a.y - b.y)));
  }
}

namespace {

// Geometric links everywhere, then the optional uniform override on present links.
void link_all(Topology& t, const std::optional<double>& uniform_p) {
  for (NodeId i = 0; i < t.size(); ++i) t.relink_from_geometry(i);
  if (!uniform_p) return;
  for (NodeId i = 0; i < t.size(); ++i) {
    for (NodeId j = i + 1; j < t.size(); ++j) {
      if (t.link(i, j) > 0.0) t.set_link(i, j, *uniform_p);
    }
  }
}

}  // namespace

int generator_node_count(const TopologySpec& t) {
  if (t.generator == "line") return t.nodes;
  if (t.generator == "grid") return t.rows * t.cols;
  if (t.generator == "three_hop_demo") return 20;
  throw ConfigError("unknown topology generator '" + t.generator + "'");
}

Topology build_topology(const TopologySpec& spec, Rng& rng) {
  if (spec.p && !(*spec.p >= 0.0 && *spec.p <= 1.0)) {
    throw ConfigError("topology.p must lie in [0, 1]");
  }
  if (spec.generator == "line") {
    if (spec.nodes < 1) throw ConfigError("line topology needs nodes >= 1");
    Topology t(spec.nodes, spec.link_model);
    for (int i = 0; i < spec.nodes; ++i) t.set_position(i, {i * spec.spacing, 0.0});
    link_all(t, spec.p);
    return t;
  }
  if (spec.generator == "grid") {
    if (spec.rows < 1 || spec.cols < 1) throw ConfigError("grid topology needs rows, cols >= 1");
    Topology t(spec.rows * spec.cols, spec.link_model);
    for (int r = 0; r < spec.rows; ++r) {
      for (int c = 0; c < spec.cols; ++c) {
        t.set_position(r * spec.cols + c, {c * spec.spacing, r * spec.spacing});
      }
    }
    link_all(t, spec.p);
    return t;
  }
  if (spec.generator == "three_hop_demo") {
    // Four tiers of five nodes, 1.5 units apart along x. With r_max = 2 a
    // tier links only to its neighbouring tiers, so hop count equals tier.
    constexpr int kTiers = 4;
    constexpr int kPerTier = 5;
    constexpr double kTierSpacing = 1.5;
    Topology t(kTiers * kPerTier, LinkModel{});
    std::uniform_real_distribution<double> dx(-0.2, 0.2);
    std::uniform_real_distribution<double> dy(-0.04, 0.04);
    for (int tier = 0; tier < kTiers; ++tier) {
      for (int k = 0; k < kPerTier; ++k) {
        const NodeId id = tier * kPerTier + k;
        if (id == 0) {
          t.set_position(0, {0.0, 0.0});
          continue;
        }
        const double x = tier * kTierSpacing + dx(rng);
        const double y = (k - 2) * 0.13 + dy(rng);
        t.set_position(id, {x, y});
      }
    }
    link_all(t, spec.p);
    return t;
  }
  throw ConfigError("unknown topology generator '" + spec.generator + "'");
}

std::vector<std::optional<int>> hop_distances_from(const Topology& t, NodeId source) {
  std::vector<std::optional<int>> dist(static_cast<std::size_t>(t.size()));
  dist[source] = 0;
  std::deque<NodeId> queue{source};
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    for (NodeId v = 0; v < t.size(); ++v) {
      if (!dist[v] && t.link(u, v) > 0.0) {
        dist[v] = *dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

std::optional<int> hop_distance(const Topology& t, NodeId a, NodeId b) {
  return hop_distances_from(t, a).at(b);
}

int hop_diameter(const Topology& t) {
  int diameter = 0;
  for (NodeId s = 0; s < t.size(); ++s) {
    for (const auto& d : hop_distances_from(t, s)) {
      if (d) diameter = std::max(diameter, *d);
    }
  }
  return diameter;
}

bool is_connected(const Topology& t) {
  const auto dist = hop_distances_from(t, 0);
  return std::all_of(dist.begin(), dist.end(), [](const auto& d) { return d.has_value(); });
}

Topology move_node(Topology t, NodeId node, Position where) {
  if (!t.contains(node)) throw ConfigError("move_node: unknown node " + std::to_string(node));
  t.set_position(node, where);
  t.relink_from_geometry(node);
  return t;
}

int default_slot_budget(const Topology& t, int n_tx) { return 2 * hop_diameter(t) + n_tx; }

std::size_t FloodOutcome::received_count() const {
  return static_cast<std::size_t>(std::count(received.begin(), received.end(), true));
}

FloodOutcome simulate_flood(const Topology& t, NodeId initiator, const FloodConfig& cfg, Rng& rng) {
  if (!t.contains(initiator)) throw ConfigError("flood initiator outside topology");
  if (cfg.n_tx < 1) throw ConfigError("n_tx must be >= 1");
  const int n = t.size();
  const int budget = cfg.slots_per_flood > 0 ? cfg.slots_per_flood : default_slot_budget(t, cfg.n_tx);

  FloodOutcome out;
  out.slots = budget;
  out.received.assign(static_cast<std::size_t>(n), false);
  out.first_rx_slot.assign(static_cast<std::size_t>(n), std::nullopt);
  std::uniform_real_distribution<double> jitter(-cfg.jitter_bound_us, cfg.jitter_bound_us);
  out.jitter_us = jitter(rng);

  std::vector<int> rx_slot(static_cast<std::size_t>(n), -1);
  rx_slot[initiator] = 0;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<NodeId> transmitters;
  transmitters.reserve(static_cast<std::size_t>(n));

  for (int slot = 1; slot < budget; ++slot) {
    transmitters.clear();
    bool pending = false;
    for (NodeId j = 0; j < n; ++j) {
      const int r = rx_slot[j];
      if (r < 0) continue;
      if (slot > r && slot <= r + cfg.n_tx) transmitters.push_back(j);
      if (slot <= r + cfg.n_tx) pending = true;
    }
    if (!pending) break;
    out.transmissions += static_cast<int>(transmitters.size());
    for (NodeId listener = 0; listener < n; ++listener) {
      if (rx_slot[listener] >= 0) continue;
      for (NodeId tx : transmitters) {
        const double p = t.link(listener, tx);
        if (p <= 0.0) continue;
        if (p >= 1.0 || coin(rng) < p) {
          rx_slot[listener] = slot;
          break;
        }
      }
    }
  }

  for (NodeId j = 0; j < n; ++j) {
    if (rx_slot[j] >= 0) {
      out.received[j] = true;
      out.first_rx_slot[j] = rx_slot[j];
    }
  }
  return out;
}

}  // namespace wcps
