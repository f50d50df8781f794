#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "wcps/engine.hpp"
#include "wcps/errors.hpp"

using namespace wcps;

namespace {

SimConfig quiet_config() {
  auto c = default_config();
  for (auto& p : c.pendulums) p.params.process_noise_std = {0, 0, 0, 0};
  return c;
}

std::string csv(const RunResult& r, const SimConfig& c) {
  std::ostringstream os;
  export_metrics(r.trace, c.pendulums.size(), static_cast<std::size_t>(generator_node_count(c.topology)), os);
  return os.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

}  // namespace

TEST(Engine, ZeroDurationIsEmpty) {
  auto c = default_config();
  c.duration = 0;
  const auto r = run(c);
  EXPECT_TRUE(r.trace.empty());
  EXPECT_EQ(csv(r, c), csv_header(5, 20) + "\n");
}

TEST(Engine, AllDefaultModesCertified) {
  const auto d = design_controllers(default_config());
  ASSERT_EQ(d.report.modes.size(), 8u);
  for (const auto& m : d.report.modes) EXPECT_TRUE(m.certified) << m.name << ": " << m.message;
  ASSERT_TRUE(d.report.all_certified());
  EXPECT_GE(d.report.dwell->tau_min, 1);
}

TEST(Engine, IdentityWeightStillCertifiesButDwellIsLong) {
  auto c = default_config();
  c.lyapunov_weight = LyapunovWeight::identity;
  const auto d = design_controllers(c);
  ASSERT_TRUE(d.report.all_certified());
  EXPECT_GT(d.report.dwell->tau_min, design_controllers(default_config()).report.dwell->tau_min);
}

TEST(Engine, StabilizeOneMatchesDenseOracle) {
  auto c = quiet_config();
  c.initial_mode = 1;
  for (auto& p : c.pendulums) p.initial_state = {};
  c.pendulums[0].initial_state = {0, 0, 0.05, 0};
  c.duration = 60;
  const auto r = run(c);
  const auto d = design_controllers(c);
  const auto& A = d.models[0].A;
  const auto& B = d.models[0].B;
  const auto& K = d.gains[0].K;
  // [x; u] with u the command in force; the predictor sees exactly one step ahead
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(5, 5);
  M.topLeftCorner(4, 4) = A;
  M.topRightCorner(4, 1) = B;
  M.bottomLeftCorner(1, 4) = -K * A;
  M.bottomRightCorner(1, 1) = -K * B;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(5);
  z(2) = 0.05;
  for (const auto& round : r.trace) {
    const auto x = round.pendulums[0].state.vector();
    EXPECT_LT((x - z.head(4)).cwiseAbs().maxCoeff(), 1e-9) << round.round;
    EXPECT_NEAR(round.pendulums[0].u, z(4), 1e-9);
    z = M * z;
  }
  EXPECT_LT(std::abs(r.trace.back().pendulums[0].state.theta), 1e-3);
}

TEST(Engine, DeterministicCsvAndSeedMatters) {
  auto c = default_config();
  c.duration = 200;
  c.topology.p = 0.8;
  const auto a = csv(run(c), c);
  EXPECT_EQ(a, csv(run(c), c));
  c.seed = 2;
  EXPECT_NE(a, csv(run(c), c));
}

TEST(Engine, CausalityOfCommands) {
  for (int d = 1; d <= 3; ++d) {
    auto c = default_config();
    c.actuation_delay = d;
    c.topology.p = 0.85;
    c.duration = 300;
    const auto r = run(c);
    int fresh = 0;
    for (const auto& round : r.trace) {
      for (const auto& p : round.pendulums) {
        if (p.command_sample_round >= 0) {
          EXPECT_EQ(round.round - p.command_sample_round, d);
          ++fresh;
        }
      }
    }
    EXPECT_GT(fresh, 0);
  }
}

TEST(Engine, DefaultDemoStaysUpright) {
  const auto c = default_config();
  const auto r = run(c);
  for (const auto& p : r.metrics.pendulums) {
    EXPECT_LT(p.rms_theta, 0.01);
    EXPECT_EQ(p.falls, 0);
  }
  EXPECT_EQ(r.metrics.agreement_violations, 0);
}

TEST(Engine, IsolatedNodeGoesSafe) {
  auto c = default_config();
  c.duration = 60;
  Command iso;
  iso.kind = Command::Kind::isolate_node;
  iso.node = 9;
  iso.round = 10;
  c.events.push_back(iso);
  const auto r = run(c);
  bool safe = false;
  for (const auto& round : r.trace) {
    if (round.round > 10 + c.silence_cap) {
      EXPECT_EQ(round.nodes[9].status, NodeStatus::safe);
    }
    safe = safe || round.nodes[9].status == NodeStatus::safe;
    for (std::size_t j = 0; j < round.nodes.size(); ++j) {
      if (j != 9) EXPECT_EQ(round.nodes[j].status, NodeStatus::active);
    }
  }
  EXPECT_TRUE(safe);
  // pendulum 1 lives on node 9 and gets no actuation while SAFE
  EXPECT_EQ(r.trace.back().pendulums[1].u, 0.0);
}

TEST(Engine, RequestInsideDwellIsRejected) {
  auto c = default_config();
  c.duration = 40;
  c.events.push_back(Command{Command::Kind::mode_request, 2, 4});
  const auto r = run(c);
  int rejected = 0;
  for (const auto& round : r.trace)
    for (const auto& e : round.events)
      if (e.kind == EventKind::mode_rejected) {
        ++rejected;
        EXPECT_EQ(e.earliest_round, r.manifest["tau_min"].get<long>());
      }
  EXPECT_EQ(rejected, 1);
  EXPECT_EQ(r.metrics.switches_rejected, 1);
}

TEST(Engine, ModeSwitchHappensAtSwitchRound) {
  auto c = default_config();
  c.duration = 80;
  c.events.push_back(Command{Command::Kind::mode_request, 30, 4});
  const auto r = run(c);
  for (const auto& round : r.trace) {
    EXPECT_EQ(round.mode, round.round >= 30 + c.lead_rounds ? 4 : 3);
    for (const auto& n : round.nodes) EXPECT_EQ(n.mode, round.mode);
  }
}

TEST(Engine, UnknownModeRequestRejectedAsUncertified) {
  auto c = default_config();
  c.duration = 30;
  c.events.push_back(Command{Command::Kind::mode_request, 20, 42});
  const auto r = run(c);
  bool seen = false;
  for (const auto& round : r.trace)
    for (const auto& e : round.events)
      if (e.kind == EventKind::mode_rejected) {
        seen = true;
        EXPECT_EQ(e.detail, "uncertified");
      }
  EXPECT_TRUE(seen);
}

TEST(Engine, SubmitValidatesCommands) {
  Simulator sim(default_config());
  Command bad;
  bad.kind = Command::Kind::isolate_node;
  bad.node = 20;
  EXPECT_THROW(sim.submit(bad), ConfigError);
  bad.kind = Command::Kind::set_link;
  bad.node = 1;
  bad.peer = 2;
  bad.p = 2.0;
  EXPECT_THROW(sim.submit(bad), ConfigError);
}

TEST(Engine, UncertifiableConfigThrows) {
  auto c = default_config();
  c.gains.assign(5, {0.0, 0.0, 0.0, 0.0});  // open loop
  const auto d = design_controllers(c);
  EXPECT_FALSE(d.report.all_certified());
  EXPECT_TRUE(d.report.modes[0].certified);  // idle parks everything
  EXPECT_FALSE(d.report.modes[1].certified);
  EXPECT_THROW(Simulator{c}, CertificationError);
}

TEST(Engine, LyapunovDecreaseUnderAdmissibleSwitching) {
  auto c = quiet_config();
  c.duration = 400;
  const auto design = design_controllers(c);
  const int tau = design.report.dwell->tau_min;
  const std::vector<int> sequence{4, 1, 6, 5, 2, 3, 4, 6};
  long k = 20;
  for (int m : sequence) {
    c.events.push_back(Command{Command::Kind::mode_request, k, m});
    k += tau + c.lead_rounds + 3;
  }
  c.cart_reference = 0.0;
  const auto r = run(c);
  EXPECT_EQ(r.metrics.switches_completed, static_cast<int>(sequence.size()));
  long last_switch = 0;
  for (std::size_t i = 0; i + 1 < r.trace.size(); ++i) {
    const auto& now = r.trace[i];
    const auto& next = r.trace[i + 1];
    if (now.mode != next.mode) {
      last_switch = next.round;
      continue;
    }
    if (now.round < last_switch + c.actuation_delay) continue;
    const auto idx = static_cast<std::size_t>(now.mode);
    const auto& cert = *design.report.modes[idx].certificate;
    Eigen::VectorXd z(20), zn(20);
    for (int p = 0; p < 5; ++p) {
      z.segment(4 * p, 4) = now.pendulums[static_cast<std::size_t>(p)].state.vector();
      zn.segment(4 * p, 4) = next.pendulums[static_cast<std::size_t>(p)].state.vector();
    }
    const double v = z.dot(cert.P * z);
    const double vn = zn.dot(cert.P * zn);
    EXPECT_LE(vn, cert.decay * v * (1 + 1e-8) + 1e-24) << "round " << now.round;
  }
}

TEST(Engine, CsvShapeAndRoundTrip) {
  auto c = default_config();
  c.duration = 10;
  auto r = run(c);
  const auto text = csv(r, c);
  const auto lines = split(text, '\n');
  ASSERT_EQ(lines.size(), 11u);
  EXPECT_EQ(lines[0], csv_header(5, 20));

  c.duration = 300;
  c.topology.p = 0.9;
  r = run(c);
  const auto rows = split(csv(r, c), '\n');
  const auto header = split(rows[0], ',');
  std::vector<double> sum(5, 0.0);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto cells = split(rows[i], ',');
    ASSERT_EQ(cells.size(), header.size());
    for (std::size_t p = 0; p < 5; ++p) {
      const double th = std::stod(cells[2 + 3 * p + 1]);
      sum[p] += th * th;
    }
    EXPECT_TRUE(cells[2 + 15 + 2] == "ACTIVE" || cells[2 + 15 + 2] == "SAFE");
  }
  for (std::size_t p = 0; p < 5; ++p) {
    EXPECT_NEAR(std::sqrt(sum[p] / 300.0), r.metrics.pendulums[p].rms_theta, 1e-9);
  }
}

TEST(Engine, ManifestContents) {
  auto c = default_config();
  c.duration = 1;
  const auto r = run(c);
  EXPECT_EQ(r.manifest["config_hash"], config_hash(c));
  EXPECT_EQ(r.manifest["certificates"].size(), 8u);
  EXPECT_EQ(r.manifest["modes"].size(), 8u);
  EXPECT_TRUE(r.manifest.contains("tau_min"));
}

TEST(Engine, MoveNodeUpdatesLinks) {
  Simulator sim(default_config());
  sim.step_round();
  Command mv;
  mv.kind = Command::Kind::move_node;
  mv.node = 7;
  mv.x = 100;
  mv.y = 100;
  sim.submit(mv);
  const auto& tr = sim.step_round();
  EXPECT_TRUE(sim.topology().neighbors(7).empty());
  ASSERT_FALSE(tr.events.empty());
  EXPECT_EQ(tr.events.back().kind, EventKind::node_moved);
  EXPECT_EQ(sim.command_log().back().round, 1);
}
