#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "hector/event_bus.hpp"
#include "hector/frame_queue.hpp"
#include "hector/frame_source.hpp"
#include "hector/inference.hpp"
#include "hector/pipeline.hpp"
#include "hector/session_store.hpp"

#include "json.hpp"

namespace hector {

struct VerdictSummary {
  std::uint64_t frames = 0;
  std::uint64_t scored = 0;
  std::map<DiscardReason, std::uint64_t> discarded;

  bool operator==(const VerdictSummary&) const = default;
};

/// Everything the review screen needs once a session stops.
struct ReviewBundle {
  std::string session_id;
  /// nullopt means the video is unscorable.
  std::optional<VideoScore> video_score;
  std::vector<SelectedFrame> selection;
  VerdictSummary summary;

  bool operator==(const ReviewBundle&) const = default;
};

ReviewBundle make_bundle(const SessionRecord& record);
nlohmann::json bundle_to_json(const ReviewBundle& bundle);

struct RunStats {
  std::vector<double> latencies_ms;  // ingest to event, non-dropped frames
  std::uint64_t frames = 0;
  std::uint64_t dropped = 0;
  double elapsed_s = 0.0;
};

/// Drives one session: an ingest thread feeding a bounded queue and a
/// worker thread running the frame chain. The worker is the session log's
/// only writer.
class LiveSession {
 public:
  using FinishedFn = std::function<void(const ReviewBundle&, const RunStats&)>;

  LiveSession(std::unique_ptr<FrameSource> source, std::unique_ptr<LogitProvider> provider,
              const PipelineConfig& config, Session session, std::filesystem::path data_dir,
              EventBus& bus, std::size_t queue_capacity, FinishedFn on_finished);
  ~LiveSession();
  LiveSession(const LiveSession&) = delete;
  LiveSession& operator=(const LiveSession&) = delete;

  void start();
  /// Stops ingesting; frames already queued still get verdicts.
  void request_stop();
  void join();

  /// Valid after join().
  Session& session() { return session_; }
  const RunStats& stats() const { return stats_; }
  /// Non-empty when the worker hit an unrecoverable error.
  const std::string& error() const { return error_; }

 private:
  void ingest_loop();
  void worker_loop();
  void run_chain();
  void finalize();

  std::unique_ptr<FrameSource> source_;
  std::unique_ptr<LogitProvider> provider_;
  FrameProcessor processor_;
  Session session_;
  std::filesystem::path data_dir_;
  EventBus& bus_;
  FrameQueue queue_;
  FinishedFn on_finished_;
  std::atomic<bool> stop_{false};
  std::thread ingest_;
  std::thread worker_;
  RunStats stats_;
  std::string error_;
};

}  // namespace hector
