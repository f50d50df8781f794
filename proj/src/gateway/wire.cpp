#include "wcps/gateway/wire.hpp"

#include <array>

#include "wcps/errors.hpp"

namespace wcps::wire {

using nlohmann::json;

json encode_state(const Simulator& sim) {
  const Topology& topo = sim.topology();
  const auto& last = sim.last_round();
  json pendulums = json::array();
  json nodes = json::array();
  long round = 0;
  double t_ms = 0.0;
  int mode = sim.authority().mode();

  if (last) {
    round = last->round;
    t_ms = last->t_ms;
    mode = last->mode;
    for (std::size_t i = 0; i < last->pendulums.size(); ++i) {
      const auto& p = last->pendulums[i];
      pendulums.push_back({{"id", i},
                           {"x", p.state.x},
                           {"theta", p.state.theta},
                           {"u", p.u},
                           {"active", p.active}});
    }
    for (std::size_t j = 0; j < last->nodes.size(); ++j) {
      const auto& n = last->nodes[j];
      const auto& pos = topo.position(static_cast<NodeId>(j));
      nodes.push_back({{"id", j},
                       {"x", pos.x},
                       {"y", pos.y},
                       {"mode", n.mode},
                       {"epoch", n.epoch},
                       {"status", std::string(to_string(n.status))},
                       {"rx", n.rx}});
    }
  } else {
    const auto& cfg = sim.config();
    const Mode& m = *sim.design().find_mode(mode);
    for (std::size_t i = 0; i < cfg.pendulums.size(); ++i) {
      const auto& s = cfg.pendulums[i].initial_state;
      pendulums.push_back({{"id", i},
                           {"x", s.x},
                           {"theta", s.theta},
                           {"u", 0.0},
                           {"active", is_actuated(m.tasks.laws[i])}});
    }
    for (const auto& n : sim.nodes()) {
      const auto& pos = topo.position(n.node);
      nodes.push_back({{"id", n.node},
                       {"x", pos.x},
                       {"y", pos.y},
                       {"mode", n.current_mode},
                       {"epoch", n.current_epoch},
                       {"status", std::string(to_string(n.status))},
                       {"rx", false}});
    }
  }

  json links = json::array();
  for (NodeId a = 0; a < topo.size(); ++a) {
    for (NodeId b = a + 1; b < topo.size(); ++b) {
      const double p = topo.link(a, b);
      if (p > 0.0) links.push_back({{"a", a}, {"b", b}, {"p", p}});
    }
  }

  return json{{"type", "state"},
              {"round", round},
              {"t_ms", t_ms},
              {"pendulums", pendulums},
              {"nodes", nodes},
              {"links", links},
              {"mode", mode},
              {"dwell_remaining", sim.dwell_remaining()}};
}

json encode_event(const TraceEvent& e) {
  switch (e.kind) {
    case EventKind::mode_changed:
      // the round at which the new mode is in force
      return json{{"type", "mode_changed"}, {"mode", e.mode}, {"epoch", e.epoch},
                  {"round", e.switch_round}};
    case EventKind::mode_rejected:
      return json{{"type", "rejected"}, {"mode", e.mode}, {"round", e.round},
                  {"earliest_round", e.earliest_round}, {"reason", e.detail}};
    case EventKind::mode_accepted:
      return json{{"type", "accepted"}, {"mode", e.mode}, {"epoch", e.epoch},
                  {"round", e.round}, {"switch_round", e.switch_round}};
    case EventKind::announcement_heard:
    case EventKind::node_switched:
    case EventKind::safe_entry:
    case EventKind::resync:
    case EventKind::plant_fall:
    case EventKind::stale_estimate:
    case EventKind::node_moved:
    case EventKind::link_changed:
    case EventKind::reference_changed:
      return to_json(e);
    case EventKind::mode_requested:
      break;
  }
  return nullptr;
}

json encode_error(std::string_view message) {
  return json{{"type", "error"}, {"message", std::string(message)}};
}

ClientMessage parse_client_message(std::string_view text) {
  static constexpr std::array<std::string_view, 5> known{
      "mode_request", "move_node", "set_link", "isolate_node", "set_reference"};
  ClientMessage out;
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    out.message = "malformed JSON";
    return out;
  }
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    out.message = "message must be an object with a string \"type\"";
    return out;
  }
  const auto type = j["type"].get<std::string>();
  bool is_known = false;
  for (auto k : known) is_known = is_known || k == type;
  if (!is_known) {
    out.status = ClientMessage::Status::ignored;
    out.message = "ignoring message of unknown type '" + type + "'";
    return out;
  }
  try {
    out.command = command_from_json(j);
    out.command.round = 0;  // stamped by the engine
    out.status = ClientMessage::Status::command;
  } catch (const Error& e) {
    out.message = e.what();
  }
  return out;
}

}  // namespace wcps::wire
