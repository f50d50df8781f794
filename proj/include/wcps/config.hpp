#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wcps/network.hpp"
#include "wcps/plant.hpp"
#include "wcps/tasks.hpp"

namespace wcps {

/// Something that changes the world at a round boundary: scripted in the
/// config, or sent by an operator through the gateway.
struct Command {
  enum class Kind { mode_request, move_node, set_link, isolate_node, set_reference };

  Kind kind = Kind::mode_request;
  long round = 0;  // boundary at which it applies
  int mode = 0;
  NodeId node = 0;
  NodeId peer = 0;
  double x = 0.0;
  double y = 0.0;
  double p = 0.0;
  double value = 0.0;

  friend bool operator==(const Command&, const Command&) = default;
};

std::string_view to_string(Command::Kind kind);
nlohmann::json to_json(const Command& c);
Command command_from_json(const nlohmann::json& j);

struct PendulumConfig {
  PendulumParams params;
  PlantState initial_state;
  NodeId node = 0;
};

struct ModeSpec {
  int id = 0;
  std::string name;
  std::vector<Law> laws;
  bool track_cart_reference = false;
};

enum class LyapunovWeight { identity, contraction };
enum class LostCommandPolicy { hold, zero };

struct SimConfig {
  std::uint64_t seed = 1;
  long duration = 1200;  // rounds
  double round_period_ms = 50.0;
  double slot_len_ms = 5.0;
  TopologySpec topology;
  FloodConfig flood;
  std::vector<PendulumConfig> pendulums;
  NodeId controller_node = 0;
  std::vector<ModeSpec> modes;  // empty: default eight-mode catalog
  int initial_mode = 3;

  std::array<double, 4> lqr_q{10.0, 1.0, 10.0, 1.0};  // diagonal state weight
  double lqr_r = 0.1;
  /// Explicit state-feedback gains, one row of 4 per pendulum; empty: LQR from lqr_q / lqr_r.
  std::vector<std::array<double, 4>> gains;

  int actuation_delay = 1;   // rounds, 1..3
  int max_loss_rounds = 10;  // L_max
  double theta_max = 0.35;   // rad
  LostCommandPolicy lost_command = LostCommandPolicy::hold;
  double cart_reference = 0.0;

  int lead_rounds = 5;
  int silence_cap = 20;

  LyapunovWeight lyapunov_weight = LyapunovWeight::contraction;
  double leader_weight = 1000.0;
  double contraction_margin = 0.1;

  std::vector<Command> events;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// The shipped demo: 20-node three-hop network (loss-free), five pendulums,
/// eight modes, 50 ms rounds, starting in "Stabilize all".
SimConfig default_config();

/// Fields absent from the document keep their default_config() values.
SimConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SimConfig& c);
SimConfig load_config(const std::filesystem::path& path);

/// 64-bit FNV-1a over the canonical JSON dump, as 16 hex digits.
std::string config_hash(const SimConfig& c);

}  // namespace wcps
