#include "wcps/tasks.hpp"

#include <algorithm>
#include <string>

#include "wcps/errors.hpp"

namespace wcps {

std::string_view to_string(Law law) {
  switch (law) {
    case Law::stabilize: return "stabilize";
    case Law::sync_leader: return "sync_leader";
    case Law::sync_follower: return "sync_follower";
    case Law::idle: return "idle";
    case Law::safe: return "safe";
  }
  return "unknown";
}

Law law_from_string(std::string_view name) {
  for (Law law : {Law::stabilize, Law::sync_leader, Law::sync_follower, Law::idle, Law::safe}) {
    if (to_string(law) == name) return law;
  }
  throw ConfigError("unknown control law '" + std::string(name) + "'");
}

std::size_t TaskSet::active_count() const {
  return static_cast<std::size_t>(std::count_if(laws.begin(), laws.end(), is_actuated));
}

std::optional<std::size_t> TaskSet::leader() const {
  for (std::size_t i = 0; i < laws.size(); ++i) {
    if (laws[i] == Law::sync_leader) return i;
  }
  return std::nullopt;
}

void TaskSet::validate(int node_count) const {
  if (pendulum_nodes.size() != laws.size()) {
    throw ConfigError("task set: pendulum_nodes and laws differ in length");
  }
  const auto leaders = std::count(laws.begin(), laws.end(), Law::sync_leader);
  const auto followers = std::count(laws.begin(), laws.end(), Law::sync_follower);
  if (followers > 0 && leaders != 1) {
    throw ConfigError("task set: followers need exactly one leader");
  }
  if (leaders > 1) throw ConfigError("task set: more than one leader");
  if (controller_node < 0 || controller_node >= node_count) {
    throw ConfigError("task set: controller node " + std::to_string(controller_node) +
                      " is not in the topology");
  }
  for (NodeId n : pendulum_nodes) {
    if (n < 0 || n >= node_count) {
      throw ConfigError("task set: pendulum node " + std::to_string(n) + " is not in the topology");
    }
  }
  if (update_period < 1) throw ConfigError("task set: update_period must be >= 1");
}

}  // namespace wcps
