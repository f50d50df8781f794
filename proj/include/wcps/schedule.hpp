#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "wcps/tasks.hpp"

namespace wcps {

enum class SlotKind { beacon, sensor_flood, compute, command_flood, actuate };

std::string_view to_string(SlotKind kind);

/// Radio is on for floods and beacons only.
inline bool uses_radio(SlotKind kind) {
  return kind == SlotKind::beacon || kind == SlotKind::sensor_flood ||
         kind == SlotKind::command_flood;
}

struct Slot {
  SlotKind kind = SlotKind::beacon;
  NodeId owner = 0;     // initiator for floods, executing node otherwise
  int pendulum = -1;    // sensor floods: which pendulum's reading
  friend bool operator==(const Slot&, const Slot&) = default;
};

/// Static timetable of one round.
struct Schedule {
  double round_period_ms = 50.0;
  double slot_len_ms = 5.0;
  std::vector<Slot> slots;

  double busy_ms() const { return static_cast<double>(slots.size()) * slot_len_ms; }
  friend bool operator==(const Schedule&, const Schedule&) = default;
};

/// Beacon, one sensor flood per active pendulum, compute at the controller,
/// one bundled command flood. Beacon only when nothing is active. Throws
/// TimingInfeasibleError (with the deficit in ms) if the slots exceed the period.
Schedule synthesize_schedule(const TaskSet& tasks, double round_period_ms, double slot_len_ms);

struct TimingCheck {
  bool ok = true;
  std::string violation;
};

/// Sensor floods precede compute, which precedes the command flood; busy time <= period.
TimingCheck check_timing(const Schedule& s);

/// Radio-on milliseconds per round.
double energy_cost(const Schedule& s);

/// Radio-on time if every command travelled in its own flood.
double unbundled_energy_cost(const Schedule& s, std::size_t actuated_pendulums);

struct Mode {
  int id = 0;
  std::string name;
  TaskSet tasks;
  Schedule schedule;
};

/// The eight-mode catalog: 0 Idle, 1 Stabilize P1, 2 Stabilize P1-P2,
/// 3 Stabilize all, 4 Synchronize all to P1, 5 Synchronize P2-P3 to P1,
/// 6 Stabilize all with operator cart reference, 7 Safe. Needs 5 pendulums.
std::vector<Mode> default_mode_catalog(const std::vector<NodeId>& pendulum_nodes,
                                       NodeId controller_node, double round_period_ms,
                                       double slot_len_ms);

}  // namespace wcps
