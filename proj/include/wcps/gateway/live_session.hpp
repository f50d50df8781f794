#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "wcps/config.hpp"
#include "wcps/engine.hpp"

namespace wcps {

/// Per-client queue of outgoing frames. When full, the oldest state frame is
/// dropped; event frames are never dropped.
class Outbox {
 public:
  struct Frame {
    bool is_state = false;
    std::string text;
  };

  explicit Outbox(std::size_t capacity = 64) : capacity_(capacity) {}

  void push(Frame frame);
  std::optional<Frame> try_pop();
  /// Blocks up to `timeout` for a frame.
  std::optional<Frame> pop(std::chrono::milliseconds timeout);
  std::size_t size() const;
  std::size_t dropped() const;
  /// Called (from the pushing thread) after every push.
  void set_notifier(std::function<void()> fn);
  void close();
  bool closed() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Frame> frames_;
  std::size_t capacity_;
  std::size_t dropped_ = 0;
  bool closed_ = false;
  std::function<void()> notify_;
};

struct LiveOptions {
  /// Wall-clock pacing per round; negative uses the config's round period, 0 runs unthrottled.
  double pace_ms = -1.0;
  /// Stop after this many rounds; 0 runs until stop().
  long max_rounds = 0;
  std::size_t outbox_capacity = 64;
  /// Keep every RoundTrace (for replay checks and exports).
  bool record_trace = false;
};

/// Owns a Simulator on an engine thread. Other threads submit commands and
/// subscribe to the frame stream; the engine never waits on them.
class LiveSession {
 public:
  /// Throws CertificationError / ConfigError from the simulator constructor.
  explicit LiveSession(SimConfig config, LiveOptions options = {});
  ~LiveSession();

  LiveSession(const LiveSession&) = delete;
  LiveSession& operator=(const LiveSession&) = delete;

  void start();
  void stop();
  /// Blocks until the engine thread exits (max_rounds reached or stop()).
  void wait();
  bool running() const { return running_.load(); }

  /// Queued for the next round boundary. Throws ConfigError for invalid commands.
  void submit(const Command& command);

  std::shared_ptr<Outbox> subscribe();
  void unsubscribe(const std::shared_ptr<Outbox>& box);

  nlohmann::json modes() const { return modes_; }
  nlohmann::json state() const;
  long round() const;
  std::vector<Command> command_log() const;
  /// Empty unless LiveOptions::record_trace.
  std::vector<RoundTrace> trace() const;
  const SimConfig& config() const { return config_; }

 private:
  void loop();
  void publish(const RoundTrace& trace, const nlohmann::json& state);

  SimConfig config_;
  LiveOptions options_;
  nlohmann::json modes_;

  mutable std::mutex sim_mu_;  // guards sim_ and state_
  Simulator sim_;
  nlohmann::json state_;
  std::vector<RoundTrace> trace_;

  std::mutex sub_mu_;
  std::vector<std::shared_ptr<Outbox>> subscribers_;

  std::atomic<bool> running_{false};
  std::atomic<bool> stop_{false};
  std::thread thread_;
};

}  // namespace wcps
