#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wcps/tasks.hpp"

namespace wcps {

/// A scheduled switch, repeated in every beacon until it takes effect.
struct Announcement {
  int target_mode = 0;
  long switch_round = 0;
  long epoch = 0;
  friend bool operator==(const Announcement&, const Announcement&) = default;
};

/// What the controller floods at the start of every round.
struct Beacon {
  int mode = 0;
  long epoch = 0;
  std::optional<Announcement> pending;
};

enum class NodeStatus { active, safe };
std::string_view to_string(NodeStatus status);

struct NodeProtocolState {
  NodeId node = 0;
  int current_mode = 0;
  long current_epoch = 0;
  std::optional<Announcement> pending;
  NodeStatus status = NodeStatus::active;
  int rounds_since_last_rx = 0;
};

struct ProtocolParams {
  int lead_rounds = 5;   // announcement to switch
  int silence_cap = 20;  // rounds without a beacon before SAFE
};

enum class ProtocolEventKind { announcement_heard, switched, safe_entry, resync };
std::string_view to_string(ProtocolEventKind kind);

struct ProtocolEvent {
  ProtocolEventKind kind = ProtocolEventKind::switched;
  NodeId node = 0;
  int mode = 0;
  long epoch = 0;
  std::string reason;  // safe_entry: "missed_switch", "horizon" or "silence"
};

struct RoundUpdate {
  NodeProtocolState state;
  std::vector<ProtocolEvent> events;
};

/// Advances one node past round `now_round`. `rx` is the beacon it heard in
/// that round, if any. The returned state is the one in force for round
/// now_round + 1; a pending switch whose switch_round is now_round + 1 takes
/// effect here. A node that could have missed an announcement (no beacon for
/// lead_rounds rounds, or more than silence_cap) or that sees a newer epoch
/// goes SAFE; a SAFE node adopts the next beacon it hears.
RoundUpdate on_round(const NodeProtocolState& state, const std::optional<Beacon>& rx,
                     long now_round, const ProtocolParams& params);

/// True iff every ACTIVE node holds the same (mode, epoch). SAFE nodes are exempt.
bool agreement_check(std::span<const NodeProtocolState> states);

struct Rejection {
  enum class Reason { dwell, uncertified };
  Reason reason = Reason::dwell;
  long earliest_round = 0;  // first round at which the request would be accepted
};

using InitiateResult = std::variant<Announcement, Rejection>;

/// The controller node's authoritative view of mode changes.
class SwitchAuthority {
 public:
  explicit SwitchAuthority(int initial_mode, long start_round = 0)
      : mode_(initial_mode), last_switch_round_(start_round) {}

  /// Accepts iff now_round - last_switch_round >= tau_min, where a pending
  /// switch counts as the last one. switch_round = now_round + lead_rounds.
  InitiateResult initiate(int target_mode, long now_round, int tau_min, int lead_rounds,
                          bool certified);

  /// Enter round `round`; returns the announcement that takes effect, if any.
  std::optional<Announcement> advance(long round);

  Beacon beacon() const { return Beacon{mode_, epoch_, pending_}; }
  int mode() const { return mode_; }
  long epoch() const { return epoch_; }
  const std::optional<Announcement>& pending() const { return pending_; }
  /// Switch round of the latest accepted announcement (pending or done).
  long last_switch_round() const {
    return pending_ ? pending_->switch_round : last_switch_round_;
  }
  /// Rounds until a request made at `now_round` would pass the dwell gate.
  long dwell_remaining(long now_round, int tau_min) const;

 private:
  int mode_;
  long epoch_ = 0;
  long last_switch_round_;
  std::optional<Announcement> pending_;
};

}  // namespace wcps
