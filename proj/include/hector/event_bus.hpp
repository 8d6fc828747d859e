#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hector/domain.hpp"

namespace hector {

enum class LifecycleState { Idle, Running, Review };
std::string to_string(LifecycleState state);

/// The live "is this view good" feedback for one frame.
struct VerdictEvent {
  std::uint64_t frame_index;
  std::int64_t timestamp_ms;
  bool scored;
  std::optional<MesScore> mes;

  bool suitable() const { return scored; }
  static VerdictEvent from(const FrameVerdict& verdict);
};

/// One JSON object per line, no trailing newline.
std::string event_line(const VerdictEvent& event);
std::string lifecycle_line(LifecycleState state, const std::string& session_id);

/// Per-subscriber bounded mailbox; when full the oldest line is discarded.
class Subscription {
 public:
  explicit Subscription(std::size_t capacity) : capacity_(capacity) {}

  std::optional<std::string> pop(std::chrono::milliseconds timeout);
  std::uint64_t missed() const;

 private:
  friend class EventBus;
  void deliver(const std::string& line);

  const std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::string> lines_;
  std::uint64_t missed_ = 0;
};

/// Fan-out of event lines. Publishing never blocks on a slow subscriber.
class EventBus {
 public:
  explicit EventBus(std::size_t per_subscriber_capacity = 256)
      : capacity_(per_subscriber_capacity) {}

  /// The subscription ends when the returned pointer is released.
  std::shared_ptr<Subscription> subscribe();
  void publish(const std::string& line);

 private:
  const std::size_t capacity_;
  std::mutex mu_;
  std::vector<std::weak_ptr<Subscription>> subscribers_;
};

}  // namespace hector
