#include "wcps/modechange.hpp"

#include <algorithm>

namespace wcps {

std::string_view to_string(NodeStatus status) {
  return status == NodeStatus::active ? "ACTIVE" : "SAFE";
}

std::string_view to_string(ProtocolEventKind kind) {
  switch (kind) {
    case ProtocolEventKind::announcement_heard: return "announce";
    case ProtocolEventKind::switched: return "switch";
    case ProtocolEventKind::safe_entry: return "safe_entry";
    case ProtocolEventKind::resync: return "resync";
  }
  return "unknown";
}

RoundUpdate on_round(const NodeProtocolState& state, const std::optional<Beacon>& rx,
                     long now_round, const ProtocolParams& params) {
  RoundUpdate out{state, {}};
  NodeProtocolState& s = out.state;
  auto emit = [&](ProtocolEventKind kind, std::string reason = {}) {
    out.events.push_back({kind, s.node, s.current_mode, s.current_epoch, std::move(reason)});
  };

  if (rx) {
    s.rounds_since_last_rx = 0;
    if (s.status == NodeStatus::safe) {
      s.current_mode = rx->mode;
      s.current_epoch = rx->epoch;
      s.pending = rx->pending;
      s.status = NodeStatus::active;
      emit(ProtocolEventKind::resync);
    } else if (rx->epoch > s.current_epoch) {
      s.status = NodeStatus::safe;
      emit(ProtocolEventKind::safe_entry, "missed_switch");
    } else if (rx->pending && rx->pending->epoch > s.current_epoch &&
               (!s.pending || rx->pending->epoch > s.pending->epoch)) {
      s.pending = rx->pending;
      out.events.push_back({ProtocolEventKind::announcement_heard, s.node, rx->pending->target_mode,
                            rx->pending->epoch, {}});
    }
  } else {
    ++s.rounds_since_last_rx;
    if (s.status == NodeStatus::active) {
      // An announcement accepted after our last beacon switches no earlier
      // than lead_rounds rounds after it.
      if (s.rounds_since_last_rx >= params.lead_rounds) {
        s.status = NodeStatus::safe;
        emit(ProtocolEventKind::safe_entry, "horizon");
      } else if (s.rounds_since_last_rx > params.silence_cap) {
        s.status = NodeStatus::safe;
        emit(ProtocolEventKind::safe_entry, "silence");
      }
    }
  }

  if (s.status == NodeStatus::active && s.pending && s.pending->switch_round == now_round + 1 &&
      s.pending->epoch == s.current_epoch + 1) {
    s.current_mode = s.pending->target_mode;
    s.current_epoch = s.pending->epoch;
    s.pending.reset();
    emit(ProtocolEventKind::switched);
  }
  return out;
}

bool agreement_check(std::span<const NodeProtocolState> states) {
  const NodeProtocolState* reference = nullptr;
  for (const auto& s : states) {
    if (s.status != NodeStatus::active) continue;
    if (!reference) {
      reference = &s;
    } else if (s.current_mode != reference->current_mode ||
               s.current_epoch != reference->current_epoch) {
      return false;
    }
  }
  return true;
}

InitiateResult SwitchAuthority::initiate(int target_mode, long now_round, int tau_min,
                                         int lead_rounds, bool certified) {
  const long earliest = last_switch_round() + tau_min;
  if (!certified) return Rejection{Rejection::Reason::uncertified, earliest};
  if (now_round - last_switch_round() < tau_min) {
    return Rejection{Rejection::Reason::dwell, earliest};
  }
  pending_ = Announcement{target_mode, now_round + lead_rounds, epoch_ + 1};
  return *pending_;
}

std::optional<Announcement> SwitchAuthority::advance(long round) {
  if (!pending_ || pending_->switch_round != round) return std::nullopt;
  Announcement done = *pending_;
  mode_ = done.target_mode;
  epoch_ = done.epoch;
  last_switch_round_ = done.switch_round;
  pending_.reset();
  return done;
}

long SwitchAuthority::dwell_remaining(long now_round, int tau_min) const {
  return std::max(0L, last_switch_round() + tau_min - now_round);
}

}  // namespace wcps
