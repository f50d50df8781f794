#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wcps/plant.hpp"
#include "wcps/tasks.hpp"

namespace wcps {

struct Position {
  double x = 0.0;
  double y = 0.0;
};

/// Distance to slot-success probability: 1 up to r_full, linear to 0 at r_max.
struct LinkModel {
  double r_full = 1.0;
  double r_max = 2.0;

  double probability(double distance) const;
};

/// Symmetric per-link slot-success probabilities over a set of placed nodes.
class Topology {
 public:
  explicit Topology(int nodes, LinkModel model = {});

  int size() const { return n_; }
  double link(NodeId a, NodeId b) const { return p_[index(a, b)]; }
  /// Sets p_ab = p_ba. Self-links are ignored.
  void set_link(NodeId a, NodeId b, double p);
  const Position& position(NodeId node) const { return positions_.at(node); }
  void set_position(NodeId node, Position pos) { positions_.at(node) = pos; }
  const LinkModel& link_model() const { return model_; }
  bool contains(NodeId node) const { return node >= 0 && node < n_; }

  /// Nodes with p > 0 towards `node`, ascending.
  std::vector<NodeId> neighbors(NodeId node) const;
  /// Recompute every link of `node` from geometry.
  void relink_from_geometry(NodeId node);

  friend bool operator==(const Topology&, const Topology&) = default;

 private:
  std::size_t index(NodeId a, NodeId b) const {
    return static_cast<std::size_t>(a) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(b);
  }

  int n_;
  LinkModel model_;
  std::vector<double> p_;
  std::vector<Position> positions_;
};

/// Generator recipe. Supported generators: "line", "grid", "three_hop_demo".
struct TopologySpec {
  std::string generator = "three_hop_demo";
  int nodes = 20;   // line length
  int rows = 2;     // grid
  int cols = 2;
  double spacing = 1.5;
  /// Uniform probability for every geometrically present link; geometric ramp if unset.
  std::optional<double> p;
  LinkModel link_model;
};

/// Node count a spec will produce; throws ConfigError on an unknown generator.
int generator_node_count(const TopologySpec& spec);

/// Throws ConfigError on an unknown generator or invalid sizes. "three_hop_demo"
/// places 20 nodes in four tiers so node 0 reaches every node in at most 3 hops.
Topology build_topology(const TopologySpec& spec, Rng& rng);

/// BFS hop count over links with p > 0; nullopt when unreachable.
std::optional<int> hop_distance(const Topology& t, NodeId a, NodeId b);
std::vector<std::optional<int>> hop_distances_from(const Topology& t, NodeId source);
/// Largest finite hop distance over all pairs.
int hop_diameter(const Topology& t);
bool is_connected(const Topology& t);

/// Returns a copy with `node` at `where` and its links recomputed from geometry.
Topology move_node(Topology t, NodeId node, Position where);

struct FloodConfig {
  int n_tx = 3;             // transmissions per node per flood
  int slots_per_flood = 0;  // 0: 2 * diameter + n_tx
  double jitter_bound_us = 50.0;
};

/// Default slot budget 2 * diameter + n_tx.
int default_slot_budget(const Topology& t, int n_tx);

struct FloodOutcome {
  std::vector<bool> received;
  std::vector<std::optional<int>> first_rx_slot;
  double jitter_us = 0.0;
  int slots = 0;          // slot budget used for the flood
  int transmissions = 0;  // total node-slot transmissions

  std::size_t received_count() const;
};

/// Slot-synchronous relay: a node first receiving in slot s transmits in slots
/// s+1..s+n_tx; a listener receives in slot s iff some per-link Bernoulli draw
/// from a transmitting neighbour succeeds. Slot 0 belongs to the initiator.
FloodOutcome simulate_flood(const Topology& t, NodeId initiator, const FloodConfig& cfg, Rng& rng);

}  // namespace wcps
