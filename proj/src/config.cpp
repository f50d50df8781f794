#include "wcps/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "wcps/errors.hpp"

namespace wcps {

using nlohmann::json;

std::string_view to_string(Command::Kind kind) {
  switch (kind) {
    case Command::Kind::mode_request: return "mode_request";
    case Command::Kind::move_node: return "move_node";
    case Command::Kind::set_link: return "set_link";
    case Command::Kind::isolate_node: return "isolate_node";
    case Command::Kind::set_reference: return "set_reference";
  }
  return "unknown";
}

namespace {

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

template <typename T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  T out{};
  read(j, key, out);
  return out;
}

}  // namespace

json to_json(const Command& c) {
  json j{{"type", std::string(to_string(c.kind))}, {"round", c.round}};
  switch (c.kind) {
    case Command::Kind::mode_request: j["mode"] = c.mode; break;
    case Command::Kind::move_node:
      j["node"] = c.node;
      j["x"] = c.x;
      j["y"] = c.y;
      break;
    case Command::Kind::set_link:
      j["a"] = c.node;
      j["b"] = c.peer;
      j["p"] = c.p;
      break;
    case Command::Kind::isolate_node: j["node"] = c.node; break;
    case Command::Kind::set_reference: j["x"] = c.value; break;
  }
  return j;
}

Command command_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("command must be a JSON object");
  const auto type = require<std::string>(j, "type");
  Command c;
  read(j, "round", c.round);
  if (type == "mode_request") {
    c.kind = Command::Kind::mode_request;
    c.mode = require<int>(j, "mode");
  } else if (type == "move_node") {
    c.kind = Command::Kind::move_node;
    c.node = require<int>(j, "node");
    c.x = require<double>(j, "x");
    c.y = require<double>(j, "y");
  } else if (type == "set_link") {
    c.kind = Command::Kind::set_link;
    c.node = require<int>(j, "a");
    c.peer = require<int>(j, "b");
    c.p = require<double>(j, "p");
  } else if (type == "isolate_node") {
    c.kind = Command::Kind::isolate_node;
    c.node = require<int>(j, "node");
  } else if (type == "set_reference") {
    c.kind = Command::Kind::set_reference;
    c.value = require<double>(j, "x");
  } else {
    throw ConfigError("unknown command type '" + type + "'");
  }
  return c;
}

void SimConfig::validate() const {
  if (!(round_period_ms >= 10.0 && round_period_ms <= 100.0)) {
    throw ConfigError("round_period_ms must lie in [10, 100]");
  }
  if (!(slot_len_ms > 0.0)) throw ConfigError("slot_len_ms must be > 0");
  if (duration < 0) throw ConfigError("duration must be >= 0");
  const int nodes = generator_node_count(topology);
  if (nodes < 1) throw ConfigError("topology must have at least one node");
  if (flood.n_tx < 1) throw ConfigError("flood.n_tx must be >= 1");
  if (flood.slots_per_flood != 0 && flood.slots_per_flood < flood.n_tx) {
    throw ConfigError("flood.slots_per_flood must be 0 (auto) or >= n_tx");
  }
  if (!(flood.jitter_bound_us >= 0.0)) throw ConfigError("flood.jitter_bound_us must be >= 0");
  if (pendulums.empty()) throw ConfigError("pendulums must not be empty");
  for (const auto& p : pendulums) {
    try {
      p.params.validate();
    } catch (const ParameterError& e) {
      throw ConfigError(std::string("pendulums: ") + e.what());
    }
    if (p.node < 0 || p.node >= nodes) throw ConfigError("pendulums.node outside topology");
    if (!p.initial_state.finite()) throw ConfigError("pendulums.initial_state must be finite");
  }
  if (controller_node < 0 || controller_node >= nodes) {
    throw ConfigError("controller_node outside topology");
  }
  std::set<int> ids;
  for (const auto& m : modes) {
    if (!ids.insert(m.id).second) throw ConfigError("modes: duplicate id " + std::to_string(m.id));
    if (m.laws.size() != pendulums.size()) {
      throw ConfigError("modes: mode " + std::to_string(m.id) + " needs one law per pendulum");
    }
  }
  if (modes.empty() && pendulums.size() != 5) {
    throw ConfigError("modes: the default catalog needs exactly 5 pendulums");
  }
  const bool known_initial = modes.empty() ? (initial_mode >= 0 && initial_mode < 8)
                                           : ids.count(initial_mode) > 0;
  if (!known_initial) throw ConfigError("initial_mode is not in the mode catalog");
  for (double q : lqr_q) {
    if (!(q >= 0.0)) throw ConfigError("lqr_q entries must be >= 0");
  }
  if (!(lqr_r > 0.0)) throw ConfigError("lqr_r must be > 0");
  if (!gains.empty() && gains.size() != pendulums.size()) {
    throw ConfigError("gains must list one row per pendulum");
  }
  for (const auto& k : gains) {
    for (double v : k) {
      if (!std::isfinite(v)) throw ConfigError("gains must be finite");
    }
  }
  if (actuation_delay < 1 || actuation_delay > 3) throw ConfigError("actuation_delay must be 1..3");
  if (max_loss_rounds < 0) throw ConfigError("max_loss_rounds must be >= 0");
  if (!(theta_max > 0.0)) throw ConfigError("theta_max must be > 0");
  if (lead_rounds < 1) throw ConfigError("lead_rounds must be >= 1");
  if (silence_cap < 1) throw ConfigError("silence_cap must be >= 1");
  if (!(leader_weight > 0.0)) throw ConfigError("leader_weight must be > 0");
  if (!(contraction_margin > 0.0 && contraction_margin < 1.0)) {
    throw ConfigError("contraction_margin must lie in (0, 1)");
  }
  for (const auto& e : events) {
    if (e.round < 0) throw ConfigError("events: round must be >= 0");
    const bool uses_node = e.kind == Command::Kind::move_node ||
                           e.kind == Command::Kind::isolate_node ||
                           e.kind == Command::Kind::set_link;
    if (uses_node && (e.node < 0 || e.node >= nodes)) throw ConfigError("events: node outside topology");
    if (e.kind == Command::Kind::set_link &&
        (e.peer < 0 || e.peer >= nodes || !(e.p >= 0.0 && e.p <= 1.0))) {
      throw ConfigError("events: set_link needs nodes in the topology and p in [0, 1]");
    }
  }
}

SimConfig default_config() {
  SimConfig c;
  c.topology.generator = "three_hop_demo";
  c.topology.p = 1.0;
  const std::array<NodeId, 5> nodes{5, 9, 10, 15, 19};
  const std::array<double, 5> theta0{0.05, -0.04, 0.03, -0.05, 0.04};
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    PendulumConfig p;
    p.node = nodes[i];
    p.initial_state.theta = theta0[i];
    c.pendulums.push_back(p);
  }
  return c;
}

namespace {

json pendulum_to_json(const PendulumConfig& p) {
  const auto& s = p.initial_state;
  return json{{"cart_mass", p.params.cart_mass},
              {"pole_mass", p.params.pole_mass},
              {"pole_com_length", p.params.pole_com_length},
              {"gravity", p.params.gravity},
              {"input_gain", p.params.input_gain},
              {"process_noise_std", p.params.process_noise_std},
              {"initial_state", std::array<double, 4>{s.x, s.v, s.theta, s.omega}},
              {"node", p.node}};
}

PendulumConfig pendulum_from_json(const json& j) {
  PendulumConfig p;
  read(j, "cart_mass", p.params.cart_mass);
  read(j, "pole_mass", p.params.pole_mass);
  read(j, "pole_com_length", p.params.pole_com_length);
  read(j, "gravity", p.params.gravity);
  read(j, "input_gain", p.params.input_gain);
  read(j, "process_noise_std", p.params.process_noise_std);
  std::array<double, 4> s{0.0, 0.0, 0.0, 0.0};
  read(j, "initial_state", s);
  p.initial_state = {s[0], s[1], s[2], s[3]};
  read(j, "node", p.node);
  return p;
}

}  // namespace

json to_json(const SimConfig& c) {
  json topo{{"generator", c.topology.generator},
            {"nodes", c.topology.nodes},
            {"rows", c.topology.rows},
            {"cols", c.topology.cols},
            {"spacing", c.topology.spacing},
            {"r_full", c.topology.link_model.r_full},
            {"r_max", c.topology.link_model.r_max}};
  if (c.topology.p) topo["p"] = *c.topology.p;
  json pendulums = json::array();
  for (const auto& p : c.pendulums) pendulums.push_back(pendulum_to_json(p));
  json modes = json::array();
  for (const auto& m : c.modes) {
    json laws = json::array();
    for (Law l : m.laws) laws.push_back(std::string(to_string(l)));
    modes.push_back({{"id", m.id},
                     {"name", m.name},
                     {"laws", laws},
                     {"track_cart_reference", m.track_cart_reference}});
  }
  json events = json::array();
  for (const auto& e : c.events) events.push_back(to_json(e));
  return json{
      {"seed", c.seed},
      {"duration", c.duration},
      {"round_period_ms", c.round_period_ms},
      {"slot_len_ms", c.slot_len_ms},
      {"topology", topo},
      {"flood",
       {{"n_tx", c.flood.n_tx},
        {"slots_per_flood", c.flood.slots_per_flood},
        {"jitter_bound_us", c.flood.jitter_bound_us}}},
      {"pendulums", pendulums},
      {"controller_node", c.controller_node},
      {"modes", modes},
      {"initial_mode", c.initial_mode},
      {"lqr_q", c.lqr_q},
      {"lqr_r", c.lqr_r},
      {"gains", c.gains},
      {"actuation_delay", c.actuation_delay},
      {"max_loss_rounds", c.max_loss_rounds},
      {"theta_max", c.theta_max},
      {"lost_command", c.lost_command == LostCommandPolicy::hold ? "hold" : "zero"},
      {"cart_reference", c.cart_reference},
      {"lead_rounds", c.lead_rounds},
      {"silence_cap", c.silence_cap},
      {"lyapunov_weight",
       c.lyapunov_weight == LyapunovWeight::contraction ? "contraction" : "identity"},
      {"leader_weight", c.leader_weight},
      {"contraction_margin", c.contraction_margin},
      {"events", events},
  };
}

SimConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  SimConfig c = default_config();
  read(j, "seed", c.seed);
  read(j, "duration", c.duration);
  read(j, "round_period_ms", c.round_period_ms);
  read(j, "slot_len_ms", c.slot_len_ms);
  if (j.contains("topology")) {
    const json& t = j.at("topology");
    TopologySpec spec;  // a new topology section starts from generator defaults
    read(t, "generator", spec.generator);
    read(t, "nodes", spec.nodes);
    read(t, "rows", spec.rows);
    read(t, "cols", spec.cols);
    read(t, "spacing", spec.spacing);
    read(t, "r_full", spec.link_model.r_full);
    read(t, "r_max", spec.link_model.r_max);
    if (t.contains("p") && !t.at("p").is_null()) spec.p = require<double>(t, "p");
    c.topology = spec;
  }
  if (j.contains("flood")) {
    const json& f = j.at("flood");
    read(f, "n_tx", c.flood.n_tx);
    read(f, "slots_per_flood", c.flood.slots_per_flood);
    read(f, "jitter_bound_us", c.flood.jitter_bound_us);
  }
  if (j.contains("pendulums")) {
    c.pendulums.clear();
    for (const auto& p : j.at("pendulums")) c.pendulums.push_back(pendulum_from_json(p));
  }
  read(j, "controller_node", c.controller_node);
  if (j.contains("modes")) {
    c.modes.clear();
    for (const auto& m : j.at("modes")) {
      ModeSpec spec;
      spec.id = require<int>(m, "id");
      read(m, "name", spec.name);
      for (const auto& l : require<std::vector<std::string>>(m, "laws")) {
        spec.laws.push_back(law_from_string(l));
      }
      read(m, "track_cart_reference", spec.track_cart_reference);
      c.modes.push_back(std::move(spec));
    }
  }
  read(j, "initial_mode", c.initial_mode);
  read(j, "lqr_q", c.lqr_q);
  read(j, "lqr_r", c.lqr_r);
  read(j, "gains", c.gains);
  read(j, "actuation_delay", c.actuation_delay);
  read(j, "max_loss_rounds", c.max_loss_rounds);
  read(j, "theta_max", c.theta_max);
  if (j.contains("lost_command")) {
    const auto policy = require<std::string>(j, "lost_command");
    if (policy == "hold") c.lost_command = LostCommandPolicy::hold;
    else if (policy == "zero") c.lost_command = LostCommandPolicy::zero;
    else throw ConfigError("lost_command must be \"hold\" or \"zero\"");
  }
  read(j, "cart_reference", c.cart_reference);
  read(j, "lead_rounds", c.lead_rounds);
  read(j, "silence_cap", c.silence_cap);
  if (j.contains("lyapunov_weight")) {
    const auto w = require<std::string>(j, "lyapunov_weight");
    if (w == "contraction") c.lyapunov_weight = LyapunovWeight::contraction;
    else if (w == "identity") c.lyapunov_weight = LyapunovWeight::identity;
    else throw ConfigError("lyapunov_weight must be \"contraction\" or \"identity\"");
  }
  read(j, "leader_weight", c.leader_weight);
  read(j, "contraction_margin", c.contraction_margin);
  if (j.contains("events")) {
    c.events.clear();
    for (const auto& e : j.at("events")) c.events.push_back(command_from_json(e));
  }
  c.validate();
  return c;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const SimConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(c).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace wcps
