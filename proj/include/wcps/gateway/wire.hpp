#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "wcps/config.hpp"
#include "wcps/engine.hpp"

namespace wcps::wire {

/// `state` frame for the latest completed round (or the initial state before
/// round 0 has run).
nlohmann::json encode_state(const Simulator& sim);

/// Stream frame for a trace event, or null for events the stream does not carry.
nlohmann::json encode_event(const TraceEvent& e);

nlohmann::json encode_error(std::string_view message);

struct ClientMessage {
  enum class Status { command, ignored, error };
  Status status = Status::error;
  Command command;
  std::string message;  // warning for ignored, reason for error
};

/// Parses one client frame. Unknown "type" values are ignored, anything
/// that is not a well-formed known command is an error.
ClientMessage parse_client_message(std::string_view text);

}  // namespace wcps::wire
