#include "hector/event_bus.hpp"

#include <algorithm>

#include "json.hpp"

namespace hector {

using nlohmann::json;

std::string to_string(LifecycleState state) {
  switch (state) {
    case LifecycleState::Idle: return "idle";
    case LifecycleState::Running: return "running";
    case LifecycleState::Review: return "review";
  }
  return "unknown";
}

VerdictEvent VerdictEvent::from(const FrameVerdict& v) {
  VerdictEvent e{v.frame_index(), v.timestamp_ms(), v.is_scored(), std::nullopt};
  if (v.is_scored()) e.mes = v.scored().mes;
  return e;
}

std::string event_line(const VerdictEvent& e) {
  json j{{"evt", "verdict"},
         {"frame", e.frame_index},
         {"ts", e.timestamp_ms},
         {"kind", e.scored ? "scored" : "discarded"}};
  if (e.mes) j["mes"] = e.mes->value();
  j["suitable"] = e.suitable();
  return j.dump();
}

std::string lifecycle_line(LifecycleState state, const std::string& session_id) {
  json j{{"evt", "lifecycle"}, {"state", to_string(state)}};
  if (!session_id.empty()) j["session"] = session_id;
  return j.dump();
}

std::optional<std::string> Subscription::pop(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  if (!cv_.wait_for(lock, timeout, [&] { return !lines_.empty(); })) return std::nullopt;
  std::string line = std::move(lines_.front());
  lines_.pop_front();
  return line;
}

std::uint64_t Subscription::missed() const {
  std::lock_guard lock(mu_);
  return missed_;
}

void Subscription::deliver(const std::string& line) {
  {
    std::lock_guard lock(mu_);
    if (lines_.size() >= capacity_) {
      lines_.pop_front();
      ++missed_;
    }
    lines_.push_back(line);
  }
  cv_.notify_one();
}

std::shared_ptr<Subscription> EventBus::subscribe() {
  auto sub = std::make_shared<Subscription>(capacity_);
  std::lock_guard lock(mu_);
  subscribers_.push_back(sub);
  return sub;
}

void EventBus::publish(const std::string& line) {
  std::vector<std::shared_ptr<Subscription>> live;
  {
    std::lock_guard lock(mu_);
    std::erase_if(subscribers_, [](const auto& w) { return w.expired(); });
    for (const auto& w : subscribers_)
      if (auto s = w.lock()) live.push_back(std::move(s));
  }
  for (const auto& s : live) s->deliver(line);
}

}  // namespace hector
