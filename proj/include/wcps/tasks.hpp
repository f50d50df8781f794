#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wcps {

using NodeId = int;

/// What the controller does with one pendulum in a given mode.
enum class Law { stabilize, sync_leader, sync_follower, idle, safe };

std::string_view to_string(Law law);
/// Throws ConfigError on an unknown name.
Law law_from_string(std::string_view name);

/// Idle and safe pendulums are parked: not actuated and held at rest.
inline bool is_actuated(Law law) { return law != Law::idle && law != Law::safe; }

/// The application tasks of one mode.
struct TaskSet {
  std::vector<Law> laws;             // one per pendulum
  std::vector<NodeId> pendulum_nodes;  // sensing/actuating node per pendulum
  NodeId controller_node = 0;
  int update_period = 1;  // rounds
  /// Stabilizing laws track the operator's cart reference instead of 0.
  bool track_cart_reference = false;

  std::size_t pendulum_count() const { return laws.size(); }
  std::size_t active_count() const;
  std::optional<std::size_t> leader() const;

  /// Throws ConfigError if the follower/leader structure or sizes are inconsistent.
  void validate(int node_count) const;
};

}  // namespace wcps
