#pragma once

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hector/event_bus.hpp"
#include "hector/live_session.hpp"

namespace hector {

/// A rejected control request. `code` is the stable name sent to clients.
class ControlError : public std::runtime_error {
 public:
  ControlError(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

struct StartRequest {
  std::string source;
  PipelineConfig config;
  std::string model;
  /// Generated from the clock when absent.
  std::optional<std::string> session_id;
};

/// Session lifecycle Idle -> Running -> Review -> Idle. Control calls are
/// serialized; the running pipeline moves itself to Review when the source
/// runs dry.
class SessionController {
 public:
  struct Options {
    std::filesystem::path data_dir;
    std::string default_model = "stub:1";
    std::size_t queue_capacity = 2;
    bool sync_each_record = true;
  };

  explicit SessionController(Options options);
  ~SessionController();

  EventBus& events() { return bus_; }

  std::string start(const StartRequest& request);
  /// Drains the in-flight frames and returns the finalized bundle.
  ReviewBundle stop();
  ReviewBundle review_get() const;
  /// Applies the batch atomically and closes the session.
  void submit_review(const std::vector<ReviewEdit>& edits,
                     const std::vector<std::uint64_t>& journal);

  LifecycleState state() const;
  std::string active_session() const;
  /// True once the session reached Review within the timeout.
  bool wait_for_review(std::chrono::milliseconds timeout) const;
  /// Statistics of the most recently finished run.
  std::optional<RunStats> last_stats() const;

 private:
  std::string next_session_id();
  void on_finished(const std::string& session_id, const ReviewBundle& bundle,
                   const RunStats& stats);

  Options options_;
  EventBus bus_;
  std::mutex control_mu_;
  mutable std::mutex state_mu_;
  mutable std::condition_variable state_cv_;
  LifecycleState state_ = LifecycleState::Idle;
  std::string session_id_;
  std::optional<ReviewBundle> bundle_;
  std::optional<RunStats> last_stats_;
  std::unique_ptr<LiveSession> live_;
  unsigned counter_ = 0;
};

}  // namespace hector
