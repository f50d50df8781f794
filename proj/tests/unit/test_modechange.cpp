#include <gtest/gtest.h>

#include <random>

#include "wcps/modechange.hpp"

using namespace wcps;

namespace {

std::vector<NodeProtocolState> fleet(int n, int mode) {
  std::vector<NodeProtocolState> s(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    s[static_cast<std::size_t>(i)].node = i;
    s[static_cast<std::size_t>(i)].current_mode = mode;
  }
  return s;
}

}  // namespace

TEST(Authority, FirstRequest) {
  SwitchAuthority a(3, 0);
  const auto r = a.initiate(4, 100, 10, 5, true);
  const auto* ann = std::get_if<Announcement>(&r);
  ASSERT_NE(ann, nullptr);
  EXPECT_EQ(ann->switch_round, 105);
  EXPECT_EQ(ann->epoch, 1);
  EXPECT_FALSE(a.advance(104).has_value());
  EXPECT_EQ(a.mode(), 3);
  EXPECT_TRUE(a.advance(105).has_value());
  EXPECT_EQ(a.mode(), 4);
  EXPECT_EQ(a.epoch(), 1);
}

TEST(Authority, DwellRejection) {
  SwitchAuthority a(3, 0);
  a.initiate(4, 100, 10, 5, true);
  a.advance(105);
  const auto r = a.initiate(2, 106, 10, 5, true);
  const auto* rej = std::get_if<Rejection>(&r);
  ASSERT_NE(rej, nullptr);
  EXPECT_EQ(rej->reason, Rejection::Reason::dwell);
  EXPECT_EQ(rej->earliest_round, 115);
  EXPECT_EQ(a.dwell_remaining(106, 10), 9);
  EXPECT_TRUE(std::holds_alternative<Announcement>(a.initiate(2, 115, 10, 5, true)));
}

TEST(Authority, PendingSwitchCountsForDwell) {
  SwitchAuthority a(3, 0);
  a.initiate(4, 100, 10, 5, true);
  const auto r = a.initiate(2, 101, 10, 5, true);
  ASSERT_TRUE(std::holds_alternative<Rejection>(r));
  EXPECT_EQ(std::get<Rejection>(r).earliest_round, 115);
}

TEST(Authority, UncertifiedRejected) {
  SwitchAuthority a(3, 0);
  const auto r = a.initiate(9, 100, 10, 5, false);
  ASSERT_TRUE(std::holds_alternative<Rejection>(r));
  EXPECT_EQ(std::get<Rejection>(r).reason, Rejection::Reason::uncertified);
}

TEST(Protocol, AllReceiveSwitchTogether) {
  SwitchAuthority a(3, 0);
  auto nodes = fleet(6, 3);
  const ProtocolParams params;
  long switch_round = -1;
  for (long k = 0; k < 40; ++k) {
    if (k == 12) switch_round = std::get<Announcement>(a.initiate(4, k, 10, 5, true)).switch_round;
    const Beacon b = a.beacon();
    for (auto& n : nodes) n = on_round(n, b, k, params).state;
    a.advance(k + 1);
    EXPECT_TRUE(agreement_check(nodes));
    for (const auto& n : nodes) {
      EXPECT_EQ(n.status, NodeStatus::active);
      EXPECT_EQ(n.current_mode, k + 1 >= switch_round && switch_round > 0 ? 4 : 3);
    }
  }
}

TEST(Protocol, MissedAnnouncementGoesSafeAndNeverActsInOldMode) {
  SwitchAuthority a(3, 0);
  auto nodes = fleet(3, 3);
  const ProtocolParams params;
  a.initiate(4, 10, 10, 5, true);  // switch at 15
  for (long k = 10; k < 25; ++k) {
    const Beacon b = a.beacon();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const bool deaf = i == 2 && k < 15;
      nodes[i] = on_round(nodes[i], deaf ? std::nullopt : std::optional<Beacon>(b), k, params).state;
    }
    a.advance(k + 1);
    EXPECT_TRUE(agreement_check(nodes));
    if (k + 1 >= 15) {
      EXPECT_FALSE(nodes[2].status == NodeStatus::active && nodes[2].current_mode == 3) << k;
    }
  }
  EXPECT_EQ(nodes[2].status, NodeStatus::active);  // resynced
  EXPECT_EQ(nodes[2].current_mode, 4);
}

TEST(Protocol, NewerEpochInBeaconMeansSafe) {
  NodeProtocolState s;
  s.current_mode = 3;
  const Beacon b{4, 1, std::nullopt};
  const auto up = on_round(s, b, 50, {});
  EXPECT_EQ(up.state.status, NodeStatus::safe);
  ASSERT_EQ(up.events.size(), 1u);
  EXPECT_EQ(up.events[0].reason, "missed_switch");
  const auto again = on_round(up.state, b, 51, {});
  EXPECT_EQ(again.state.status, NodeStatus::active);
  EXPECT_EQ(again.state.current_mode, 4);
  EXPECT_EQ(again.events[0].kind, ProtocolEventKind::resync);
}

TEST(Protocol, IsolatedNodeGoesSafe) {
  NodeProtocolState s;
  for (long k = 0; k < 21; ++k) s = on_round(s, std::nullopt, k, {}).state;
  EXPECT_EQ(s.status, NodeStatus::safe);
  // even with a long lead horizon the silence cap applies
  NodeProtocolState t;
  const ProtocolParams slow{100, 20};
  for (long k = 0; k < 20; ++k) t = on_round(t, std::nullopt, k, slow).state;
  EXPECT_EQ(t.status, NodeStatus::active);
  t = on_round(t, std::nullopt, 20, slow).state;
  EXPECT_EQ(t.status, NodeStatus::safe);
}

TEST(Agreement, Cases) {
  auto s = fleet(3, 2);
  EXPECT_TRUE(agreement_check(s));
  s[1].status = NodeStatus::safe;
  s[1].current_mode = 5;
  EXPECT_TRUE(agreement_check(s));
  s[2].current_mode = 6;
  EXPECT_FALSE(agreement_check(s));
}

TEST(Protocol, RandomLossNeverBreaksAgreement) {
  std::mt19937_64 rng(42);
  for (int run = 0; run < 1000; ++run) {
    const double p = std::uniform_real_distribution<double>(0.3, 1.0)(rng);
    std::bernoulli_distribution hear(p);
    SwitchAuthority a(3, 0);
    auto nodes = fleet(8, 3);
    for (long k = 0; k < 200; ++k) {
      if (k % 13 == 0) a.initiate(static_cast<int>(k % 8), k, 10, 5, true);
      const Beacon b = a.beacon();
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        const bool rx = i == 0 || hear(rng);
        nodes[i] = on_round(nodes[i], rx ? std::optional<Beacon>(b) : std::nullopt, k, {}).state;
      }
      a.advance(k + 1);
      ASSERT_TRUE(agreement_check(nodes)) << "run " << run << " round " << k;
      for (const auto& n : nodes) {
        if (n.status == NodeStatus::active) {
          ASSERT_EQ(n.current_mode, a.mode());
          ASSERT_EQ(n.current_epoch, a.epoch());
        }
      }
    }
  }
}
