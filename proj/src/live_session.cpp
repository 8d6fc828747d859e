#include "hector/live_session.hpp"

#include <chrono>

#include "hector/image_io.hpp"
#include "hector/json_codec.hpp"

namespace hector {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

ReviewBundle make_bundle(const SessionRecord& record) {
  ReviewBundle b{record.session_id, record.video_score, record.selection, {}};
  for (const auto& v : record.verdicts) {
    ++b.summary.frames;
    if (v.is_scored()) {
      ++b.summary.scored;
    } else {
      ++b.summary.discarded[v.discarded().reason];
    }
  }
  return b;
}

json bundle_to_json(const ReviewBundle& b) {
  json selection = json::array();
  for (const auto& s : b.selection) selection.push_back(codec::selected_to_json(s));
  json discarded = json::object();
  for (const auto& [reason, n] : b.summary.discarded) discarded[to_string(reason)] = n;
  json j{{"session", b.session_id},
         {"unscorable", !b.video_score.has_value()},
         {"video_score", b.video_score ? codec::video_score_to_json(*b.video_score) : json(nullptr)},
         {"selection", std::move(selection)},
         {"summary", {{"frames", b.summary.frames}, {"scored", b.summary.scored},
                      {"discarded", std::move(discarded)}}}};
  return j;
}

LiveSession::LiveSession(std::unique_ptr<FrameSource> source,
                         std::unique_ptr<LogitProvider> provider, const PipelineConfig& config,
                         Session session, std::filesystem::path data_dir, EventBus& bus,
                         std::size_t queue_capacity, FinishedFn on_finished)
    : source_(std::move(source)),
      provider_(std::move(provider)),
      processor_(config, *provider_),
      session_(std::move(session)),
      data_dir_(std::move(data_dir)),
      bus_(bus),
      queue_(queue_capacity, source_->live() ? OverflowPolicy::DropOldest : OverflowPolicy::Block),
      on_finished_(std::move(on_finished)) {}

LiveSession::~LiveSession() {
  request_stop();
  join();
}

void LiveSession::start() {
  worker_ = std::thread([this] { worker_loop(); });
  ingest_ = std::thread([this] { ingest_loop(); });
}

void LiveSession::request_stop() { stop_.store(true); }

void LiveSession::join() {
  if (ingest_.joinable()) ingest_.join();
  if (worker_.joinable()) worker_.join();
}

void LiveSession::ingest_loop() {
  const double fps = source_->fps();
  const auto t0 = Clock::now();
  std::uint64_t n = 0;
  while (!stop_.load()) {
    if (fps > 0.0) {
      const auto due = t0 + std::chrono::duration_cast<Clock::duration>(
                                std::chrono::duration<double>(static_cast<double>(n) / fps));
      std::this_thread::sleep_until(due);
      if (stop_.load()) break;
    }
    std::optional<Frame> frame;
    try {
      frame = source_->next();
    } catch (const std::exception&) {
      break;  // a decode failure ends the stream like EOF
    }
    if (!frame) break;
    const auto index = frame->index();
    const auto ts = frame->timestamp_ms();
    QueuedFrame item{index, ts, Clock::now(), std::make_shared<const Frame>(std::move(*frame))};
    if (!queue_.push(std::move(item))) break;
    ++n;
  }
  queue_.close();
}

void LiveSession::worker_loop() {
  const auto t0 = Clock::now();
  try {
    run_chain();
  } catch (const std::exception& e) {
    // The log is unusable past this point; stop ingest and close out.
    error_ = e.what();
    stop_.store(true);
    queue_.close();
    while (queue_.pop()) {
    }
  }
  stats_.elapsed_s = std::chrono::duration<double>(Clock::now() - t0).count();
  try {
    finalize();
  } catch (const std::exception& e) {
    if (error_.empty()) error_ = e.what();
    if (on_finished_) on_finished_(make_bundle(session_.record()), stats_);
  }
}

void LiveSession::run_chain() {
  while (auto item = queue_.pop()) {
    ProcessOutcome outcome = item->frame
                                 ? processor_.process(std::move(item->frame))
                                 : ProcessOutcome{processor_.dropped(item->index, item->timestamp_ms),
                                                  std::nullopt, std::nullopt};
    session_.append_verdict(outcome.verdict);
    if (outcome.smoothed) session_.append_smoothed(*outcome.smoothed);
    bus_.publish(event_line(VerdictEvent::from(outcome.verdict)));

    ++stats_.frames;
    const bool dropped = !outcome.quality.has_value();
    if (dropped) {
      ++stats_.dropped;
    } else {
      stats_.latencies_ms.push_back(
          std::chrono::duration<double, std::milli>(Clock::now() - item->ingested_at).count());
    }
  }
}

void LiveSession::finalize() {
  const auto& record = session_.record();
  std::vector<SelectedFrame> persisted;
  for (const auto& entry : final_selection(processor_.selection())) {
    SelectedFrame s{entry.frame_index, entry.mes, entry.certainty, entry.probs,
                    selection_image_name(record.session_id, entry.frame_index, entry.mes)};
    if (entry.image) write_png(data_dir_ / s.image_file, *entry.image);
    persisted.push_back(std::move(s));
  }
  session_.end_session(std::move(persisted), processor_.video_score(), now_iso8601());
  if (on_finished_) on_finished_(make_bundle(session_.record()), stats_);
}

}  // namespace hector
