#include "wcps/gateway/cli.hpp"

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "wcps/config.hpp"
#include "wcps/engine.hpp"
#include "wcps/errors.hpp"
#include "wcps/gateway/live_session.hpp"
#include "wcps/gateway/server.hpp"

namespace wcps {

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

SimConfig resolve_config(const std::string& path) {
  std::string p = path;
  if (p.empty()) {
    if (const char* env = std::getenv("WCPS_CONFIG")) p = env;
  }
  return p.empty() ? default_config() : load_config(p);
}

int print_certificates(const SimConfig& cfg, std::ostream& out) {
  const ControlDesign d = design_controllers(cfg);
  int failed = 0;
  for (const auto& m : d.report.modes) {
    out << "mode " << m.mode_id << " '" << m.name << "': ";
    if (m.certified) {
      out << "certified rho=" << m.certificate->rho << " decay=" << m.certificate->decay << '\n';
    } else {
      out << "FAILED " << m.message << '\n';
      ++failed;
    }
  }
  if (d.report.dwell) {
    out << "tau_min=" << d.report.dwell->tau_min << " rounds (mu=" << d.report.dwell->mu
        << ", worst decay=" << d.report.dwell->worst_decay << ")\n";
  }
  out << d.report.modes.size() - static_cast<std::size_t>(failed) << "/" << d.report.modes.size()
      << " modes certified\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wireless cyber-physical system simulator", "wcps"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<long> duration;
  std::string out_path = "metrics.csv";
  std::string manifest_path;
  auto* run_cmd = app.add_subcommand("run", "Batch simulation, writes a metrics CSV");
  run_cmd->add_option("--config", config_path, "JSON config (default: built-in demo or $WCPS_CONFIG)");
  run_cmd->add_option("--seed", seed, "Override the config seed");
  run_cmd->add_option("--duration", duration, "Override the duration in rounds")->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--out", out_path, "Metrics CSV path")->capture_default_str();
  run_cmd->add_option("--manifest", manifest_path, "Also write the run manifest JSON here");

  int port = 8080;
  if (const char* env = std::getenv("WCPS_PORT")) {
    try {
      port = std::stoi(env);
    } catch (const std::exception&) {
      err << "wcps: ignoring invalid WCPS_PORT '" << env << "'\n";
    }
  }
  long serve_rounds = 0;
  auto* serve_cmd = app.add_subcommand("serve", "Live session with HTTP and websocket endpoints");
  serve_cmd->add_option("--config", config_path, "JSON config (default: built-in demo or $WCPS_CONFIG)");
  serve_cmd->add_option("--port", port, "Listen port (default 8080 or $WCPS_PORT)")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--rounds", serve_rounds, "Stop after this many rounds (0: run until interrupted)")
      ->check(CLI::NonNegativeNumber);

  auto* certify_cmd = app.add_subcommand("certify", "Print mode certificates and tau_min");
  certify_cmd->add_option("--config", config_path, "JSON config (default: built-in demo or $WCPS_CONFIG)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    SimConfig cfg = resolve_config(config_path);
    if (*certify_cmd) return print_certificates(cfg, out);

    if (*run_cmd) {
      if (seed) cfg.seed = *seed;
      if (duration) cfg.duration = *duration;
      const RunResult r = run(cfg);
      std::ofstream csv(out_path);
      if (!csv) throw IoError("cannot open '" + out_path + "' for writing");
      export_metrics(r.trace, cfg.pendulums.size(),
                     static_cast<std::size_t>(generator_node_count(cfg.topology)), csv);
      if (!manifest_path.empty()) {
        std::ofstream mf(manifest_path);
        if (!mf) throw IoError("cannot open '" + manifest_path + "' for writing");
        nlohmann::json m = r.manifest;
        m["metrics"] = to_json(r.metrics);
        mf << m.dump(2) << '\n';
      }
      out << "wrote " << r.trace.size() << " rounds to " << out_path << '\n';
      return 0;
    }

    if (*serve_cmd) {
      LiveSession live(cfg, LiveOptions{-1.0, serve_rounds, 64, false});
      Server server(live, static_cast<std::uint16_t>(port));
      server.start();
      out << "serving on port " << server.port() << " (GET /modes, GET /state, ws /ws)" << std::endl;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      live.start();
      while (!g_interrupted && live.running()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
      }
      live.stop();
      server.stop();
      return 0;
    }
  } catch (const CertificationError& e) {
    err << "wcps: certification failed: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "wcps: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace wcps
