#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "wcps/config.hpp"
#include "wcps/control.hpp"
#include "wcps/modechange.hpp"
#include "wcps/network.hpp"
#include "wcps/plant.hpp"
#include "wcps/schedule.hpp"
#include "wcps/stability.hpp"

namespace wcps {

struct PendulumTrace {
  PlantState state;  // sampled at the start of the round
  double u = 0.0;    // command applied during the round
  bool active = false;
  bool fallen = false;
  long command_sample_round = -1;  // sample round of a freshly applied command, else -1
};

struct FloodSummary {
  SlotKind kind = SlotKind::beacon;
  NodeId initiator = 0;
  int pendulum = -1;
  std::size_t received = 0;
  double jitter_us = 0.0;
};

struct NodeTrace {
  int mode = 0;  // state in force during the round
  long epoch = 0;
  NodeStatus status = NodeStatus::active;
  bool rx = false;  // heard this round's beacon
  int floods_received = 0;
};

enum class EventKind {
  mode_requested,
  mode_accepted,
  mode_rejected,
  mode_changed,
  announcement_heard,
  node_switched,
  safe_entry,
  resync,
  plant_fall,
  stale_estimate,
  node_moved,
  link_changed,
  reference_changed,
};
std::string_view to_string(EventKind kind);

struct TraceEvent {
  EventKind kind = EventKind::mode_changed;
  long round = 0;
  int node = -1;
  int pendulum = -1;
  int mode = -1;
  long epoch = -1;
  long switch_round = -1;
  long earliest_round = -1;
  std::string detail;
};

nlohmann::json to_json(const TraceEvent& e);

struct RoundTrace {
  long round = 0;
  double t_ms = 0.0;
  int mode = 0;  // authoritative mode during the round
  long epoch = 0;
  std::vector<PendulumTrace> pendulums;
  std::vector<FloodSummary> floods;
  std::vector<NodeTrace> nodes;
  std::vector<TraceEvent> events;
  double radio_on_ms = 0.0;
  bool agreement = true;  // agreement_check at the boundary closing this round
};

struct PendulumMetrics {
  double rms_theta = 0.0;
  double max_abs_theta = 0.0;
  int falls = 0;
};

struct Metrics {
  long rounds = 0;
  std::vector<PendulumMetrics> pendulums;
  std::vector<double> node_reception_rate;
  int switches_attempted = 0;
  int switches_accepted = 0;
  int switches_rejected = 0;
  int switches_completed = 0;
  int safe_entries = 0;
  int agreement_violations = 0;
  double energy_ms_per_round = 0.0;
};

nlohmann::json to_json(const Metrics& m);

/// Per-mode outcome of the startup certification.
struct ModeCertification {
  int mode_id = 0;
  std::string name;
  bool certified = false;
  std::string message;
  std::optional<ModeCertificate> certificate;
};

struct CertificationReport {
  std::vector<ModeCertification> modes;
  std::optional<DwellTimeBound> dwell;  // set iff every mode is certified
  bool all_certified() const { return dwell.has_value(); }
};

/// Everything derived from a config before round 0: discrete models, gains,
/// mode catalog with schedules, Lyapunov certificates and the dwell bound.
struct ControlDesign {
  std::vector<DiscreteLtiModel> models;
  std::vector<ControllerGain> gains;
  std::vector<Eigen::MatrixXd> lyapunov_weights;  // per pendulum, 4x4
  std::vector<Mode> modes;
  CertificationReport report;

  const Mode* find_mode(int id) const;
  /// Stacked closed loop of all pendulums under a mode (parked blocks are 0).
  Eigen::MatrixXd closed_loop(const Mode& mode) const;
};

/// Throws on invalid configs, numerical failures in synthesis, or infeasible
/// schedules; certification failures are reported, not thrown.
ControlDesign design_controllers(const SimConfig& config);

/// Mode catalog with certificates and tau_min, as served by GET /modes.
nlohmann::json mode_catalog_json(const ControlDesign& design);

/// The round-synchronous world. Single-threaded; commands queued with
/// submit() are applied at the next round boundary and logged with that round.
class Simulator {
 public:
  /// Throws CertificationError if any mode fails certification.
  explicit Simulator(SimConfig config);

  const RoundTrace& step_round();

  /// Throws ConfigError for commands naming unknown nodes or bad values.
  void submit(Command command);

  long round() const { return round_; }
  const SimConfig& config() const { return config_; }
  const ControlDesign& design() const { return design_; }
  const DwellTimeBound& dwell() const { return *design_.report.dwell; }
  const Topology& topology() const { return topology_; }
  const std::vector<NodeProtocolState>& nodes() const { return nodes_; }
  const SwitchAuthority& authority() const { return authority_; }
  long dwell_remaining() const { return authority_.dwell_remaining(round_, dwell().tau_min); }
  const std::vector<Command>& command_log() const { return command_log_; }
  const std::optional<RoundTrace>& last_round() const { return last_; }
  nlohmann::json manifest() const;

 private:
  struct PendulumRuntime {
    PlantState state;
    bool fallen = false;
    bool parked = true;
    // controller side
    Eigen::VectorXd x_hat;
    long estimate_round = 0;
    long last_update_round = 0;
    std::deque<double> released;  // commands for rounds released_from, released_from+1, ...
    long released_from = 0;
    bool stale = false;
    // actuator side
    std::deque<std::pair<long, std::pair<double, long>>> inbox;  // (round, (u, sample round))
    double last_applied = 0.0;
    int missed = 0;
    Rng rng;
  };

  void apply_command(const Command& c, RoundTrace& trace);
  void park(std::size_t i, long now);
  double released_command(const PendulumRuntime& p, long round) const;

  SimConfig config_;
  ControlDesign design_;
  Topology topology_;
  FloodConfig flood_;
  SwitchAuthority authority_;
  std::vector<NodeProtocolState> nodes_;
  std::vector<PendulumRuntime> pendulums_;
  ProtocolParams protocol_;
  Rng net_rng_;
  long round_ = 0;
  double cart_reference_;
  std::deque<Command> inbox_;
  std::vector<Command> command_log_;
  std::optional<RoundTrace> last_;
};

struct RunResult {
  std::vector<RoundTrace> trace;
  Metrics metrics;
  nlohmann::json manifest;
  std::vector<Command> command_log;
};

/// Batch run: scripted events from the config are submitted at their rounds.
RunResult run(const SimConfig& config);

Metrics compute_metrics(const std::vector<RoundTrace>& trace);

/// CSV header: round,t_ms, then p<i>_x,p<i>_theta,p<i>_u per pendulum, then
/// n<j>_rx,n<j>_mode,n<j>_status per node.
std::string csv_header(std::size_t pendulums, std::size_t nodes);

/// One row per round; header only for an empty trace. Numbers are printed
/// with 17 significant digits. Throws IoError if the stream fails.
void export_metrics(const std::vector<RoundTrace>& trace, std::size_t pendulums,
                    std::size_t nodes, std::ostream& out);

}  // namespace wcps
