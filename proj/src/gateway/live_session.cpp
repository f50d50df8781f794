#include "wcps/gateway/live_session.hpp"

#include <algorithm>
#include <iostream>

#include "wcps/gateway/wire.hpp"

namespace wcps {

void Outbox::push(Frame frame) {
  std::function<void()> notify;
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    if (frames_.size() >= capacity_) {
      auto it = std::find_if(frames_.begin(), frames_.end(), [](const Frame& f) { return f.is_state; });
      if (it != frames_.end()) {
        frames_.erase(it);
        ++dropped_;
      }
    }
    frames_.push_back(std::move(frame));
    notify = notify_;
  }
  cv_.notify_one();
  if (notify) notify();
}

std::optional<Outbox::Frame> Outbox::try_pop() {
  std::lock_guard lock(mu_);
  if (frames_.empty()) return std::nullopt;
  Frame f = std::move(frames_.front());
  frames_.pop_front();
  return f;
}

std::optional<Outbox::Frame> Outbox::pop(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return !frames_.empty() || closed_; });
  if (frames_.empty()) return std::nullopt;
  Frame f = std::move(frames_.front());
  frames_.pop_front();
  return f;
}

std::size_t Outbox::size() const {
  std::lock_guard lock(mu_);
  return frames_.size();
}

std::size_t Outbox::dropped() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

void Outbox::set_notifier(std::function<void()> fn) {
  std::lock_guard lock(mu_);
  notify_ = std::move(fn);
}

void Outbox::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
    notify_ = nullptr;
  }
  cv_.notify_all();
}

bool Outbox::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

LiveSession::LiveSession(SimConfig config, LiveOptions options)
    : config_(config), options_(options), sim_(std::move(config)) {
  modes_ = mode_catalog_json(sim_.design());
  state_ = wire::encode_state(sim_);
  if (options_.pace_ms < 0) options_.pace_ms = config_.round_period_ms;
}

LiveSession::~LiveSession() { stop(); }

void LiveSession::start() {
  if (running_.exchange(true)) return;
  stop_ = false;
  thread_ = std::thread([this] { loop(); });
}

void LiveSession::stop() {
  stop_ = true;
  if (thread_.joinable()) thread_.join();
  running_ = false;
  std::lock_guard lock(sub_mu_);
  for (auto& s : subscribers_) s->close();
}

void LiveSession::wait() {
  if (thread_.joinable()) thread_.join();
}

void LiveSession::submit(const Command& command) {
  std::lock_guard lock(sim_mu_);
  sim_.submit(command);
}

std::shared_ptr<Outbox> LiveSession::subscribe() {
  auto box = std::make_shared<Outbox>(options_.outbox_capacity);
  std::lock_guard lock(sub_mu_);
  subscribers_.push_back(box);
  return box;
}

void LiveSession::unsubscribe(const std::shared_ptr<Outbox>& box) {
  box->close();
  std::lock_guard lock(sub_mu_);
  std::erase(subscribers_, box);
}

nlohmann::json LiveSession::state() const {
  std::lock_guard lock(sim_mu_);
  return state_;
}

long LiveSession::round() const {
  std::lock_guard lock(sim_mu_);
  return sim_.round();
}

std::vector<Command> LiveSession::command_log() const {
  std::lock_guard lock(sim_mu_);
  return sim_.command_log();
}

std::vector<RoundTrace> LiveSession::trace() const {
  std::lock_guard lock(sim_mu_);
  return trace_;
}

void LiveSession::publish(const RoundTrace& trace, const nlohmann::json& state) {
  std::vector<Outbox::Frame> frames;
  for (const auto& e : trace.events) {
    auto j = wire::encode_event(e);
    if (!j.is_null()) frames.push_back({false, j.dump()});
  }
  frames.push_back({true, state.dump()});
  std::lock_guard lock(sub_mu_);
  for (auto& s : subscribers_) {
    for (const auto& f : frames) s->push(f);
  }
}

void LiveSession::loop() {
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration_cast<clock::duration>(
      std::chrono::duration<double, std::milli>(options_.pace_ms));
  auto deadline = clock::now();
  long done = 0;
  while (!stop_ && (options_.max_rounds == 0 || done < options_.max_rounds)) {
    RoundTrace trace;
    nlohmann::json state;
    try {
      std::lock_guard lock(sim_mu_);
      trace = sim_.step_round();
      state = wire::encode_state(sim_);
      state_ = state;
      if (options_.record_trace) trace_.push_back(trace);
    } catch (const std::exception& e) {
      std::cerr << "wcps: engine stopped: " << e.what() << '\n';
      break;
    }
    publish(trace, state);
    ++done;
    if (options_.pace_ms > 0) {
      deadline += period;
      std::this_thread::sleep_until(deadline);
    }
  }
  running_ = false;
}

}  // namespace wcps
