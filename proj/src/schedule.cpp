#include "wcps/schedule.hpp"

#include <algorithm>
#include <string>

#include "wcps/errors.hpp"

namespace wcps {

std::string_view to_string(SlotKind kind) {
  switch (kind) {
    case SlotKind::beacon: return "beacon";
    case SlotKind::sensor_flood: return "sensor_flood";
    case SlotKind::compute: return "compute";
    case SlotKind::command_flood: return "command_flood";
    case SlotKind::actuate: return "actuate";
  }
  return "unknown";
}

Schedule synthesize_schedule(const TaskSet& tasks, double round_period_ms, double slot_len_ms) {
  if (!(round_period_ms > 0.0)) throw ParameterError("round_period_ms", "must be > 0");
  if (!(slot_len_ms > 0.0)) throw ParameterError("slot_len_ms", "must be > 0");

  Schedule s{round_period_ms, slot_len_ms, {}};
  s.slots.push_back({SlotKind::beacon, tasks.controller_node, -1});
  for (std::size_t i = 0; i < tasks.laws.size(); ++i) {
    if (is_actuated(tasks.laws[i])) {
      s.slots.push_back({SlotKind::sensor_flood, tasks.pendulum_nodes.at(i), static_cast<int>(i)});
    }
  }
  if (s.slots.size() > 1) {
    s.slots.push_back({SlotKind::compute, tasks.controller_node, -1});
    s.slots.push_back({SlotKind::command_flood, tasks.controller_node, -1});
  }
  const double deficit = s.busy_ms() - round_period_ms;
  if (deficit > 0.0) {
    throw TimingInfeasibleError(std::to_string(s.slots.size()) + " slots of " +
                                    std::to_string(slot_len_ms) + " ms exceed the " +
                                    std::to_string(round_period_ms) + " ms round by " +
                                    std::to_string(deficit) + " ms",
                                deficit);
  }
  return s;
}

TimingCheck check_timing(const Schedule& s) {
  if (s.busy_ms() > s.round_period_ms) {
    return {false, "slots need " + std::to_string(s.busy_ms()) + " ms but the round is " +
                       std::to_string(s.round_period_ms) + " ms"};
  }
  auto position = [&](SlotKind kind, bool last) -> std::ptrdiff_t {
    std::ptrdiff_t found = -1;
    for (std::size_t i = 0; i < s.slots.size(); ++i) {
      if (s.slots[i].kind == kind) {
        found = static_cast<std::ptrdiff_t>(i);
        if (!last) break;
      }
    }
    return found;
  };
  const auto last_sensor = position(SlotKind::sensor_flood, true);
  const auto compute = position(SlotKind::compute, false);
  const auto command = position(SlotKind::command_flood, false);
  if (last_sensor >= 0 && (compute < 0 || compute < last_sensor)) {
    return {false, "a sensor flood is not followed by the compute slot"};
  }
  if (command >= 0 && (compute < 0 || command < compute)) {
    return {false, "command flood precedes the compute slot"};
  }
  if (compute >= 0 && command < 0) {
    return {false, "compute slot without a command flood"};
  }
  return {};
}

double energy_cost(const Schedule& s) {
  const auto radio = std::count_if(s.slots.begin(), s.slots.end(),
                                   [](const Slot& slot) { return uses_radio(slot.kind); });
  return static_cast<double>(radio) * s.slot_len_ms;
}

double unbundled_energy_cost(const Schedule& s, std::size_t actuated_pendulums) {
  const auto floods = std::count_if(s.slots.begin(), s.slots.end(), [](const Slot& slot) {
    return slot.kind == SlotKind::beacon || slot.kind == SlotKind::sensor_flood;
  });
  return static_cast<double>(static_cast<std::size_t>(floods) + actuated_pendulums) * s.slot_len_ms;
}

std::vector<Mode> default_mode_catalog(const std::vector<NodeId>& pendulum_nodes,
                                       NodeId controller_node, double round_period_ms,
                                       double slot_len_ms) {
  if (pendulum_nodes.size() != 5) {
    throw ConfigError("the default mode catalog is defined for exactly 5 pendulums");
  }
  using L = Law;
  struct Entry {
    const char* name;
    std::vector<Law> laws;
    bool track = false;
  };
  const std::vector<Entry> entries = {
      {"Idle", {L::idle, L::idle, L::idle, L::idle, L::idle}},
      {"Stabilize P1", {L::stabilize, L::idle, L::idle, L::idle, L::idle}},
      {"Stabilize P1-P2", {L::stabilize, L::stabilize, L::idle, L::idle, L::idle}},
      {"Stabilize all", {L::stabilize, L::stabilize, L::stabilize, L::stabilize, L::stabilize}},
      {"Synchronize all to P1",
       {L::sync_leader, L::sync_follower, L::sync_follower, L::sync_follower, L::sync_follower}},
      {"Synchronize P2-P3 to P1",
       {L::sync_leader, L::sync_follower, L::sync_follower, L::idle, L::idle}},
      {"Stabilize all with cart reference",
       {L::stabilize, L::stabilize, L::stabilize, L::stabilize, L::stabilize},
       true},
      {"Safe", {L::safe, L::safe, L::safe, L::safe, L::safe}},
  };
  std::vector<Mode> modes;
  for (std::size_t id = 0; id < entries.size(); ++id) {
    Mode m;
    m.id = static_cast<int>(id);
    m.name = entries[id].name;
    m.tasks.laws = entries[id].laws;
    m.tasks.pendulum_nodes = pendulum_nodes;
    m.tasks.controller_node = controller_node;
    m.tasks.track_cart_reference = entries[id].track;
    m.schedule = synthesize_schedule(m.tasks, round_period_ms, slot_len_ms);
    modes.push_back(std::move(m));
  }
  return modes;
}

}  // namespace wcps
