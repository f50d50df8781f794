#include "wcps/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

#include "wcps/errors.hpp"

namespace wcps {

using nlohmann::json;

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::mode_requested: return "mode_requested";
    case EventKind::mode_accepted: return "mode_accepted";
    case EventKind::mode_rejected: return "rejected";
    case EventKind::mode_changed: return "mode_changed";
    case EventKind::announcement_heard: return "announce";
    case EventKind::node_switched: return "switch";
    case EventKind::safe_entry: return "safe_entry";
    case EventKind::resync: return "resync";
    case EventKind::plant_fall: return "plant_fall";
    case EventKind::stale_estimate: return "stale_estimate";
    case EventKind::node_moved: return "node_moved";
    case EventKind::link_changed: return "link_changed";
    case EventKind::reference_changed: return "reference_changed";
  }
  return "unknown";
}

json to_json(const TraceEvent& e) {
  json j{{"type", std::string(to_string(e.kind))}, {"round", e.round}};
  if (e.node >= 0) j["node"] = e.node;
  if (e.pendulum >= 0) j["pendulum"] = e.pendulum;
  if (e.mode >= 0) j["mode"] = e.mode;
  if (e.epoch >= 0) j["epoch"] = e.epoch;
  if (e.switch_round >= 0) j["switch_round"] = e.switch_round;
  if (e.earliest_round >= 0) j["earliest_round"] = e.earliest_round;
  if (!e.detail.empty()) j["detail"] = e.detail;
  return j;
}

json to_json(const Metrics& m) {
  json pend = json::array();
  for (const auto& p : m.pendulums) {
    pend.push_back({{"rms_theta", p.rms_theta},
                    {"max_abs_theta", p.max_abs_theta},
                    {"falls", p.falls}});
  }
  return json{{"rounds", m.rounds},
              {"pendulums", pend},
              {"node_reception_rate", m.node_reception_rate},
              {"switches_attempted", m.switches_attempted},
              {"switches_accepted", m.switches_accepted},
              {"switches_rejected", m.switches_rejected},
              {"switches_completed", m.switches_completed},
              {"safe_entries", m.safe_entries},
              {"agreement_violations", m.agreement_violations},
              {"energy_ms_per_round", m.energy_ms_per_round}};
}

// ---------------------------------------------------------------------------
// Controller synthesis and certification

const Mode* ControlDesign::find_mode(int id) const {
  for (const auto& m : modes) {
    if (m.id == id) return &m;
  }
  return nullptr;
}

Eigen::MatrixXd ControlDesign::closed_loop(const Mode& mode) const {
  const auto count = static_cast<Eigen::Index>(models.size());
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(4 * count, 4 * count);
  const auto leader = mode.tasks.leader();
  for (Eigen::Index i = 0; i < count; ++i) {
    const Law law = mode.tasks.laws[static_cast<std::size_t>(i)];
    if (!is_actuated(law)) continue;
    const auto& model = models[static_cast<std::size_t>(i)];
    const auto& K = gains[static_cast<std::size_t>(i)].K;
    Z.block(4 * i, 4 * i, 4, 4) = model.A - model.B * K;
    if (law == Law::sync_follower) {
      // u = -K x_f + K e1 e1' x_leader
      const auto l = static_cast<Eigen::Index>(*leader);
      Z.block(4 * i, 4 * l, 4, 1) += model.B * K(0, 0);
    }
  }
  return Z;
}

namespace {

Eigen::MatrixXd contraction_weight(const Eigen::MatrixXd& acl, double margin) {
  const double rho = spectral_radius(acl);
  const double gamma = rho + margin * (1.0 - rho);
  const Eigen::MatrixXd pg = solve_discrete_lyapunov(acl / gamma, Eigen::MatrixXd::Identity(4, 4));
  Eigen::MatrixXd w = pg - acl.transpose() * pg * acl;
  return 0.5 * (w + w.transpose());
}

std::vector<Mode> build_modes(const SimConfig& config) {
  std::vector<NodeId> nodes;
  for (const auto& p : config.pendulums) nodes.push_back(p.node);
  if (config.modes.empty()) {
    return default_mode_catalog(nodes, config.controller_node, config.round_period_ms,
                                config.slot_len_ms);
  }
  std::vector<Mode> modes;
  for (const auto& spec : config.modes) {
    Mode m;
    m.id = spec.id;
    m.name = spec.name;
    m.tasks.laws = spec.laws;
    m.tasks.pendulum_nodes = nodes;
    m.tasks.controller_node = config.controller_node;
    m.tasks.track_cart_reference = spec.track_cart_reference;
    m.schedule = synthesize_schedule(m.tasks, config.round_period_ms, config.slot_len_ms);
    modes.push_back(std::move(m));
  }
  return modes;
}

}  // namespace

ControlDesign design_controllers(const SimConfig& config) {
  config.validate();
  ControlDesign d;
  const double ts = config.round_period_ms / 1000.0;
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(4, 4);
  for (int i = 0; i < 4; ++i) Q(i, i) = config.lqr_q[static_cast<std::size_t>(i)];
  const Eigen::MatrixXd R = Eigen::MatrixXd::Constant(1, 1, config.lqr_r);

  for (std::size_t i = 0; i < config.pendulums.size(); ++i) {
    const auto& p = config.pendulums[i];
    auto model = discretize_zoh(linearize_cartpole(p.params), ts,
                                diagonal_covariance(p.params.process_noise_std));
    if (config.gains.empty()) {
      const Eigen::MatrixXd P = solve_dare(model.A, model.B, Q, R);
      d.gains.push_back(lqr_gain(model.A, model.B, R, P));
    } else {
      // given gains are not checked here; certification decides
      const auto& k = config.gains[i];
      d.gains.push_back(ControllerGain{Eigen::RowVector4d(k[0], k[1], k[2], k[3]), -1});
    }
    d.models.push_back(std::move(model));
  }

  d.modes = build_modes(config);
  const int node_count = generator_node_count(config.topology);
  std::set<std::size_t> leaders;
  for (const auto& m : d.modes) {
    m.tasks.validate(node_count);
    if (auto l = m.tasks.leader()) leaders.insert(*l);
  }

  for (std::size_t i = 0; i < d.models.size(); ++i) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Identity(4, 4);
    const Eigen::MatrixXd acl = d.models[i].A - d.models[i].B * d.gains[i].K;
    if (config.lyapunov_weight == LyapunovWeight::contraction && spectral_radius(acl) < 1.0) {
      w = contraction_weight(acl, config.contraction_margin);
      if (leaders.count(i)) w *= config.leader_weight;
    }
    d.lyapunov_weights.push_back(std::move(w));
  }
  const auto dim = static_cast<Eigen::Index>(4 * d.models.size());
  Eigen::MatrixXd weight = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t i = 0; i < d.models.size(); ++i) {
    weight.block(4 * static_cast<Eigen::Index>(i), 4 * static_cast<Eigen::Index>(i), 4, 4) =
        d.lyapunov_weights[i];
  }

  std::vector<ModeCertificate> certs;
  for (const auto& m : d.modes) {
    ModeCertification entry{m.id, m.name, false, {}, std::nullopt};
    try {
      entry.certificate = certify_mode(m.id, d.closed_loop(m), weight);
      entry.certified = true;
      certs.push_back(*entry.certificate);
    } catch (const Error& e) {
      entry.message = e.what();
    }
    d.report.modes.push_back(std::move(entry));
  }
  if (certs.size() == d.modes.size()) d.report.dwell = dwell_time_bound(certs);
  return d;
}

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json schedule_json(const Schedule& s) {
  json slots = json::array();
  for (const auto& slot : s.slots) {
    json j{{"kind", std::string(to_string(slot.kind))}, {"owner", slot.owner}};
    if (slot.pendulum >= 0) j["pendulum"] = slot.pendulum;
    slots.push_back(j);
  }
  return json{{"round_period_ms", s.round_period_ms},
              {"slot_len_ms", s.slot_len_ms},
              {"busy_ms", s.busy_ms()},
              {"energy_ms", energy_cost(s)},
              {"slots", slots}};
}

}  // namespace

json mode_catalog_json(const ControlDesign& design) {
  json modes = json::array();
  for (std::size_t i = 0; i < design.modes.size(); ++i) {
    const Mode& m = design.modes[i];
    json laws = json::array();
    for (Law l : m.tasks.laws) laws.push_back(std::string(to_string(l)));
    const auto& cert = design.report.modes[i];
    json entry{{"id", m.id},
               {"name", m.name},
               {"laws", laws},
               {"track_cart_reference", m.tasks.track_cart_reference},
               {"certified", cert.certified},
               {"schedule", schedule_json(m.schedule)}};
    if (cert.certificate) {
      entry["rho"] = cert.certificate->rho;
      entry["decay"] = cert.certificate->decay;
    } else {
      entry["error"] = cert.message;
    }
    modes.push_back(entry);
  }
  json out{{"modes", modes}};
  if (design.report.dwell) {
    out["tau_min"] = design.report.dwell->tau_min;
    out["mu"] = design.report.dwell->mu;
    out["worst_decay"] = design.report.dwell->worst_decay;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Simulator

namespace {

Rng make_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    stream, 0x5eedU};
  return Rng(seq);
}

ControlDesign certified_design(const SimConfig& config) {
  ControlDesign d = design_controllers(config);
  for (const auto& m : d.report.modes) {
    if (!m.certified) throw CertificationError(m.mode_id, m.message);
  }
  return d;
}

Topology initial_topology(const SimConfig& config) {
  Rng rng = make_rng(config.seed, 0);
  return build_topology(config.topology, rng);
}

}  // namespace

Simulator::Simulator(SimConfig config)
    : config_(std::move(config)),
      design_(certified_design(config_)),
      topology_(initial_topology(config_)),
      flood_(config_.flood),
      authority_(config_.initial_mode, 0),
      protocol_{config_.lead_rounds, config_.silence_cap},
      net_rng_(make_rng(config_.seed, 1)),
      cart_reference_(config_.cart_reference) {
  if (!design_.find_mode(config_.initial_mode)) {
    throw ConfigError("initial_mode is not in the mode catalog");
  }
  if (flood_.slots_per_flood == 0) {
    flood_.slots_per_flood = default_slot_budget(topology_, flood_.n_tx);
  }
  for (NodeId j = 0; j < topology_.size(); ++j) {
    NodeProtocolState s;
    s.node = j;
    s.current_mode = config_.initial_mode;
    nodes_.push_back(s);
  }
  for (std::size_t i = 0; i < config_.pendulums.size(); ++i) {
    PendulumRuntime p;
    p.state = config_.pendulums[i].initial_state;
    p.parked = false;
    p.x_hat = Eigen::VectorXd::Zero(4);
    p.released.assign(static_cast<std::size_t>(config_.actuation_delay), 0.0);
    p.rng = make_rng(config_.seed, 2 + static_cast<std::uint32_t>(i));
    pendulums_.push_back(std::move(p));
  }
  std::stable_sort(config_.events.begin(), config_.events.end(),
                   [](const Command& a, const Command& b) { return a.round < b.round; });
}

void Simulator::submit(Command command) {
  auto check_node = [&](NodeId n) {
    if (!topology_.contains(n)) throw ConfigError("unknown node " + std::to_string(n));
  };
  switch (command.kind) {
    case Command::Kind::mode_request:
      break;
    case Command::Kind::move_node:
      check_node(command.node);
      if (!std::isfinite(command.x) || !std::isfinite(command.y)) {
        throw ConfigError("move_node needs finite coordinates");
      }
      break;
    case Command::Kind::set_link:
      check_node(command.node);
      check_node(command.peer);
      if (!(command.p >= 0.0 && command.p <= 1.0)) throw ConfigError("link p must lie in [0, 1]");
      break;
    case Command::Kind::isolate_node:
      check_node(command.node);
      break;
    case Command::Kind::set_reference:
      if (!std::isfinite(command.value)) throw ConfigError("set_reference needs a finite x");
      break;
  }
  inbox_.push_back(command);
}

double Simulator::released_command(const PendulumRuntime& p, long round) const {
  const long idx = round - p.released_from;
  if (idx < 0 || idx >= static_cast<long>(p.released.size())) return 0.0;
  return p.released[static_cast<std::size_t>(idx)];
}

void Simulator::park(std::size_t i, long now) {
  PendulumRuntime& p = pendulums_[i];
  p.state = PlantState{};
  p.fallen = false;
  p.parked = true;
  p.x_hat.setZero();
  p.estimate_round = now;
  p.last_update_round = now;
  p.released.assign(static_cast<std::size_t>(config_.actuation_delay) + 1, 0.0);
  p.released_from = now;
  p.stale = false;
  p.inbox.clear();
  p.last_applied = 0.0;
  p.missed = 0;
}

void Simulator::apply_command(const Command& c, RoundTrace& trace) {
  const long k = round_;
  Command stamped = c;
  stamped.round = k;
  command_log_.push_back(stamped);

  auto check_node = [&](NodeId n) {
    if (!topology_.contains(n)) throw ConfigError("command names unknown node " + std::to_string(n));
  };
  TraceEvent ev;
  ev.round = k;
  switch (c.kind) {
    case Command::Kind::mode_request: {
      trace.events.push_back({EventKind::mode_requested, k, -1, -1, c.mode, -1, -1, -1, {}});
      const Mode* mode = design_.find_mode(c.mode);
      const bool certified = mode != nullptr;
      const auto result =
          authority_.initiate(c.mode, k, dwell().tau_min, config_.lead_rounds, certified);
      if (const auto* a = std::get_if<Announcement>(&result)) {
        ev.kind = EventKind::mode_accepted;
        ev.mode = a->target_mode;
        ev.epoch = a->epoch;
        ev.switch_round = a->switch_round;
      } else {
        const auto& r = std::get<Rejection>(result);
        ev.kind = EventKind::mode_rejected;
        ev.mode = c.mode;
        ev.earliest_round = r.earliest_round;
        ev.detail = r.reason == Rejection::Reason::dwell ? "dwell" : "uncertified";
      }
      break;
    }
    case Command::Kind::move_node:
      check_node(c.node);
      topology_ = move_node(std::move(topology_), c.node, {c.x, c.y});
      ev.kind = EventKind::node_moved;
      ev.node = c.node;
      break;
    case Command::Kind::set_link:
      check_node(c.node);
      check_node(c.peer);
      topology_.set_link(c.node, c.peer, c.p);
      ev.kind = EventKind::link_changed;
      ev.node = c.node;
      ev.detail = std::to_string(c.peer);
      break;
    case Command::Kind::isolate_node:
      check_node(c.node);
      for (NodeId j = 0; j < topology_.size(); ++j) topology_.set_link(c.node, j, 0.0);
      ev.kind = EventKind::link_changed;
      ev.node = c.node;
      ev.detail = "isolated";
      break;
    case Command::Kind::set_reference:
      if (!std::isfinite(c.value)) throw ConfigError("set_reference needs a finite x");
      cart_reference_ = c.value;
      ev.kind = EventKind::reference_changed;
      ev.detail = std::to_string(c.value);
      break;
  }
  trace.events.push_back(std::move(ev));
}

const RoundTrace& Simulator::step_round() {
  const long k = round_;
  const int delay = config_.actuation_delay;
  RoundTrace tr;
  tr.round = k;
  tr.t_ms = static_cast<double>(k) * config_.round_period_ms;

  // Round boundary: scripted events, then queued operator commands.
  for (const auto& e : config_.events) {
    if (e.round == k) apply_command(e, tr);
  }
  while (!inbox_.empty()) {
    const Command c = inbox_.front();
    inbox_.pop_front();
    apply_command(c, tr);
  }

  const Mode& mode = *design_.find_mode(authority_.mode());
  const Beacon beacon = authority_.beacon();
  tr.mode = mode.id;
  tr.epoch = authority_.epoch();
  tr.radio_on_ms = energy_cost(mode.schedule);

  const std::size_t count = pendulums_.size();
  const NodeId controller = mode.tasks.controller_node;
  for (std::size_t i = 0; i < count; ++i) {
    if (!is_actuated(mode.tasks.laws[i])) {
      park(i, k);
    } else {
      pendulums_[i].parked = false;
    }
  }

  tr.nodes.resize(nodes_.size());
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    tr.nodes[j].mode = nodes_[j].current_mode;
    tr.nodes[j].epoch = nodes_[j].current_epoch;
    tr.nodes[j].status = nodes_[j].status;
  }

  std::vector<PlantState> samples(count);
  for (std::size_t i = 0; i < count; ++i) samples[i] = pendulums_[i].state;
  std::vector<bool> sensor_rx(count, false);
  std::vector<bool> beacon_rx(nodes_.size(), false);
  std::vector<double> commands(count, 0.0);

  auto record_flood = [&](const Slot& slot) {
    FloodOutcome out = simulate_flood(topology_, slot.owner, flood_, net_rng_);
    tr.floods.push_back({slot.kind, slot.owner, slot.pendulum, out.received_count(), out.jitter_us});
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
      if (out.received[j]) ++tr.nodes[j].floods_received;
    }
    return out;
  };

  for (const Slot& slot : mode.schedule.slots) {
    switch (slot.kind) {
      case SlotKind::beacon: {
        const auto out = record_flood(slot);
        beacon_rx = out.received;
        break;
      }
      case SlotKind::sensor_flood: {
        const auto out = record_flood(slot);
        sensor_rx[static_cast<std::size_t>(slot.pendulum)] = out.received[controller];
        break;
      }
      case SlotKind::compute: {
        std::vector<Eigen::VectorXd> predicted(count, Eigen::VectorXd::Zero(4));
        std::vector<int> staleness(count, 0);
        for (std::size_t i = 0; i < count; ++i) {
          if (!is_actuated(mode.tasks.laws[i])) continue;
          PendulumRuntime& p = pendulums_[i];
          const auto& model = design_.models[i];
          if (sensor_rx[i]) {
            p.x_hat = samples[i].vector();
            p.estimate_round = k;
            p.last_update_round = k;
          } else {
            // Roll the belief forward with the commands we released.
            while (p.estimate_round < k) {
              p.x_hat = model.A * p.x_hat + model.B * released_command(p, p.estimate_round);
              ++p.estimate_round;
            }
          }
          while (p.released_from < k) {
            if (!p.released.empty()) p.released.pop_front();
            ++p.released_from;
          }
          PredictorState ps;
          ps.x_hat = p.x_hat;
          ps.last_update_round = p.last_update_round;
          for (int j = 0; j < delay; ++j) {
            ps.pending_inputs.push_back(Eigen::VectorXd::Constant(1, released_command(p, k + j)));
          }
          predicted[i] = predict_state(model, ps, delay);
          staleness[i] = static_cast<int>(k - p.last_update_round);
        }
        const LawOutput law = control_law(mode.tasks, design_.gains, predicted, staleness,
                                          {config_.max_loss_rounds, cart_reference_});
        std::vector<bool> now_stale(count, false);
        for (std::size_t i : law.stale) now_stale[i] = true;
        for (std::size_t i = 0; i < count; ++i) {
          if (!is_actuated(mode.tasks.laws[i])) continue;
          PendulumRuntime& p = pendulums_[i];
          if (now_stale[i] && !p.stale) {
            tr.events.push_back({EventKind::stale_estimate, k, -1, static_cast<int>(i), -1, -1,
                                 -1, -1, "command forced to zero"});
          }
          p.stale = now_stale[i];
          commands[i] = law.commands[i];
          const long target = k + delay;
          const long idx = target - p.released_from;
          if (idx >= static_cast<long>(p.released.size())) {
            p.released.resize(static_cast<std::size_t>(idx) + 1, 0.0);
          }
          p.released[static_cast<std::size_t>(idx)] = commands[i];
        }
        break;
      }
      case SlotKind::command_flood: {
        const auto out = record_flood(slot);
        for (std::size_t i = 0; i < count; ++i) {
          if (!is_actuated(mode.tasks.laws[i])) continue;
          if (out.received[mode.tasks.pendulum_nodes[i]]) {
            pendulums_[i].inbox.push_back({k + delay, {commands[i], k}});
          }
        }
        break;
      }
      case SlotKind::actuate:
        break;
    }
  }

  // Plants evolve over the round with the commands in force.
  tr.pendulums.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    PendulumRuntime& p = pendulums_[i];
    PendulumTrace& pt = tr.pendulums[i];
    pt.state = samples[i];
    if (p.parked) continue;
    pt.active = true;
    if (p.fallen) {
      pt.fallen = true;
      continue;
    }
    while (!p.inbox.empty() && p.inbox.front().first < k) p.inbox.pop_front();
    std::optional<std::pair<double, long>> fresh;
    if (!p.inbox.empty() && p.inbox.front().first == k) {
      fresh = p.inbox.front().second;
      p.inbox.pop_front();
    }
    const NodeId node = mode.tasks.pendulum_nodes[i];
    double u = 0.0;
    if (nodes_[static_cast<std::size_t>(node)].status == NodeStatus::safe) {
      p.last_applied = 0.0;
    } else if (fresh) {
      u = fresh->first;
      p.last_applied = u;
      p.missed = 0;
      pt.command_sample_round = fresh->second;
    } else {
      ++p.missed;
      if (config_.lost_command == LostCommandPolicy::hold && p.missed <= config_.max_loss_rounds) {
        u = p.last_applied;
      }
    }
    pt.u = u;
    p.state = step(design_.models[i], p.state, u, p.rng);
    if (exceeds_envelope(p.state, config_.theta_max)) {
      p.fallen = true;
      tr.events.push_back({EventKind::plant_fall, k, node, static_cast<int>(i), -1, -1, -1, -1,
                           "theta left the envelope"});
    }
  }

  // Protocol bookkeeping at the boundary into round k + 1.
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    tr.nodes[j].rx = beacon_rx[j];
    const std::optional<Beacon> rx = beacon_rx[j] ? std::optional<Beacon>(beacon) : std::nullopt;
    RoundUpdate upd = on_round(nodes_[j], rx, k, protocol_);
    for (const auto& e : upd.events) {
      TraceEvent ev;
      ev.round = k;
      ev.node = e.node;
      ev.mode = e.mode;
      ev.epoch = e.epoch;
      ev.detail = e.reason;
      switch (e.kind) {
        case ProtocolEventKind::announcement_heard: ev.kind = EventKind::announcement_heard; break;
        case ProtocolEventKind::switched: ev.kind = EventKind::node_switched; break;
        case ProtocolEventKind::safe_entry: ev.kind = EventKind::safe_entry; break;
        case ProtocolEventKind::resync: ev.kind = EventKind::resync; break;
      }
      tr.events.push_back(std::move(ev));
    }
    nodes_[j] = std::move(upd.state);
  }
  if (const auto done = authority_.advance(k + 1)) {
    tr.events.push_back({EventKind::mode_changed, k, -1, -1, done->target_mode, done->epoch,
                         done->switch_round, -1, {}});
  }
  tr.agreement = agreement_check(nodes_);

  ++round_;
  last_ = std::move(tr);
  return *last_;
}

json Simulator::manifest() const {
  json certs = json::array();
  for (const auto& m : design_.report.modes) {
    json c{{"mode_id", m.mode_id}, {"name", m.name}, {"certified", m.certified}};
    if (m.certificate) {
      c["rho"] = m.certificate->rho;
      c["decay"] = m.certificate->decay;
      c["P"] = matrix_json(m.certificate->P);
    }
    certs.push_back(c);
  }
  json gains = json::array();
  for (const auto& g : design_.gains) gains.push_back(matrix_json(g.K));
  json weights = json::array();
  for (const auto& w : design_.lyapunov_weights) weights.push_back(matrix_json(w));
  const auto& bound = dwell();
  return json{{"config_hash", config_hash(config_)},
              {"config", to_json(config_)},
              {"tau_min", bound.tau_min},
              {"mu", bound.mu},
              {"worst_decay", bound.worst_decay},
              {"certificates", certs},
              {"gains", gains},
              {"lyapunov_weights", weights},
              {"slots_per_flood", flood_.slots_per_flood},
              {"modes", mode_catalog_json(design_)["modes"]}};
}

// ---------------------------------------------------------------------------
// Batch runs and outputs

RunResult run(const SimConfig& config) {
  Simulator sim(config);
  RunResult result;
  result.trace.reserve(static_cast<std::size_t>(config.duration));
  for (long k = 0; k < config.duration; ++k) result.trace.push_back(sim.step_round());
  result.metrics = compute_metrics(result.trace);
  result.manifest = sim.manifest();
  result.command_log = sim.command_log();
  return result;
}

Metrics compute_metrics(const std::vector<RoundTrace>& trace) {
  Metrics m;
  m.rounds = static_cast<long>(trace.size());
  if (trace.empty()) return m;
  const std::size_t pend = trace.front().pendulums.size();
  const std::size_t nodes = trace.front().nodes.size();
  m.pendulums.assign(pend, {});
  std::vector<double> sum_sq(pend, 0.0);
  std::vector<long> received(nodes, 0);
  long floods = 0;
  double radio = 0.0;
  for (const auto& r : trace) {
    for (std::size_t i = 0; i < pend; ++i) {
      const double th = r.pendulums[i].state.theta;
      sum_sq[i] += th * th;
      m.pendulums[i].max_abs_theta = std::max(m.pendulums[i].max_abs_theta, std::abs(th));
    }
    for (std::size_t j = 0; j < nodes; ++j) received[j] += r.nodes[j].floods_received;
    floods += static_cast<long>(r.floods.size());
    radio += r.radio_on_ms;
    if (!r.agreement) ++m.agreement_violations;
    for (const auto& e : r.events) {
      switch (e.kind) {
        case EventKind::mode_requested: ++m.switches_attempted; break;
        case EventKind::mode_accepted: ++m.switches_accepted; break;
        case EventKind::mode_rejected: ++m.switches_rejected; break;
        case EventKind::mode_changed: ++m.switches_completed; break;
        case EventKind::safe_entry: ++m.safe_entries; break;
        case EventKind::plant_fall: ++m.pendulums[static_cast<std::size_t>(e.pendulum)].falls; break;
        default: break;
      }
    }
  }
  const double n = static_cast<double>(trace.size());
  for (std::size_t i = 0; i < pend; ++i) m.pendulums[i].rms_theta = std::sqrt(sum_sq[i] / n);
  m.node_reception_rate.resize(nodes, 0.0);
  for (std::size_t j = 0; j < nodes; ++j) {
    m.node_reception_rate[j] = floods > 0 ? static_cast<double>(received[j]) / floods : 0.0;
  }
  m.energy_ms_per_round = radio / n;
  return m;
}

std::string csv_header(std::size_t pendulums, std::size_t nodes) {
  std::string h = "round,t_ms";
  for (std::size_t i = 0; i < pendulums; ++i) {
    const auto s = std::to_string(i);
    h += ",p" + s + "_x,p" + s + "_theta,p" + s + "_u";
  }
  for (std::size_t j = 0; j < nodes; ++j) {
    const auto s = std::to_string(j);
    h += ",n" + s + "_rx,n" + s + "_mode,n" + s + "_status";
  }
  return h;
}

void export_metrics(const std::vector<RoundTrace>& trace, std::size_t pendulums,
                    std::size_t nodes, std::ostream& out) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << csv_header(pendulums, nodes) << '\n';
  for (const auto& r : trace) {
    std::string line = std::to_string(r.round) + ',' + num(r.t_ms);
    for (const auto& p : r.pendulums) {
      line += ',' + num(p.state.x) + ',' + num(p.state.theta) + ',' + num(p.u);
    }
    for (const auto& n : r.nodes) {
      line += std::string(",") + (n.rx ? "1" : "0") + ',' + std::to_string(n.mode) + ',' +
              std::string(to_string(n.status));
    }
    out << line << '\n';
  }
  out.flush();
  if (!out) throw IoError("failed to write metrics CSV");
}

}  // namespace wcps
