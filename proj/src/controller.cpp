#include "hector/controller.hpp"

#include <algorithm>
#include <ctime>
#include <set>

namespace hector {

namespace fs = std::filesystem;

SessionController::SessionController(Options options) : options_(std::move(options)) {
  std::error_code ec;
  fs::create_directories(options_.data_dir, ec);
}

SessionController::~SessionController() {
  std::unique_ptr<LiveSession> live;
  {
    std::lock_guard lock(control_mu_);
    live = std::move(live_);
  }
  live.reset();  // stops and joins outside the locks
}

std::string SessionController::next_session_id() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  ::gmtime_r(&t, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%S", &tm);
  for (;;) {
    std::string id = std::string(stamp) + "-" + std::to_string(++counter_);
    if (!fs::exists(options_.data_dir / session_file_name(id))) return id;
  }
}

std::string SessionController::start(const StartRequest& request) {
  std::lock_guard control(control_mu_);
  {
    std::lock_guard lock(state_mu_);
    if (state_ != LifecycleState::Idle) {
      throw ControlError("AlreadyRunning", "session " + session_id_ + " is " + to_string(state_));
    }
  }
  if (auto problems = validate_config(request.config); !problems.empty()) {
    std::string msg;
    for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
    throw ControlError("InvalidConfig", msg);
  }

  const std::string model = request.model.empty() ? options_.default_model : request.model;
  std::unique_ptr<LogitProvider> provider;
  try {
    provider = make_provider(model);
  } catch (const std::exception& e) {
    throw ControlError("InvalidModel", e.what());
  }
  std::optional<std::uint64_t> stub_seed;
  if (auto* stub = dynamic_cast<StubProvider*>(provider.get())) stub_seed = stub->spec().seed;

  std::unique_ptr<FrameSource> source;
  try {
    source = open_source(request.source, stub_seed);
  } catch (const std::exception& e) {
    throw ControlError("SourceUnavailable", e.what());
  }

  const std::string id = request.session_id.value_or(next_session_id());
  SessionRecord meta;
  meta.session_id = id;
  meta.started_at = now_iso8601();
  meta.source = source->descriptor();
  meta.model = provider->name();
  meta.config = request.config;
  Session session = [&] {
    try {
      return Session::create(options_.data_dir, std::move(meta),
                             Session::Options{options_.sync_each_record});
    } catch (const SessionError& e) {
      throw ControlError("SessionUnavailable", e.what());
    }
  }();

  {
    std::lock_guard lock(state_mu_);
    state_ = LifecycleState::Running;
    session_id_ = id;
    bundle_.reset();
  }
  bus_.publish(lifecycle_line(LifecycleState::Running, id));
  live_ = std::make_unique<LiveSession>(
      std::move(source), std::move(provider), request.config, std::move(session),
      options_.data_dir, bus_, options_.queue_capacity,
      [this, id](const ReviewBundle& bundle, const RunStats& stats) {
        on_finished(id, bundle, stats);
      });
  live_->start();
  return id;
}

void SessionController::on_finished(const std::string& session_id, const ReviewBundle& bundle,
                                    const RunStats& stats) {
  {
    std::lock_guard lock(state_mu_);
    if (session_id != session_id_ || state_ != LifecycleState::Running) return;
    state_ = LifecycleState::Review;
    bundle_ = bundle;
    last_stats_ = stats;
  }
  state_cv_.notify_all();
  bus_.publish(lifecycle_line(LifecycleState::Review, session_id));
}

ReviewBundle SessionController::stop() {
  std::lock_guard control(control_mu_);
  {
    std::lock_guard lock(state_mu_);
    if (state_ != LifecycleState::Running) throw ControlError("NotRunning", "no session is running");
  }
  live_->request_stop();
  live_->join();
  std::lock_guard lock(state_mu_);
  return *bundle_;
}

ReviewBundle SessionController::review_get() const {
  std::lock_guard lock(state_mu_);
  if (state_ != LifecycleState::Review) throw ControlError("NotInReview", "no session in review");
  return *bundle_;
}

void SessionController::submit_review(const std::vector<ReviewEdit>& edits,
                                      const std::vector<std::uint64_t>& journal) {
  std::lock_guard control(control_mu_);
  {
    std::lock_guard lock(state_mu_);
    if (state_ != LifecycleState::Review) throw ControlError("NotInReview", "no session in review");
  }
  live_->join();
  Session& session = live_->session();

  std::vector<ReviewEdit> batch = edits;
  const std::string now = now_iso8601();
  for (auto& e : batch)
    if (e.edited_at.empty()) e.edited_at = now;
  const std::set<std::uint64_t> picks(journal.begin(), journal.end());
  for (auto& e : batch)
    if (picks.contains(e.frame_index)) e.keep_in_journal = true;
  for (auto frame : picks) {
    const bool edited = std::any_of(batch.begin(), batch.end(),
                                    [&](const ReviewEdit& e) { return e.frame_index == frame; });
    if (edited) continue;
    const auto& sel = session.record().selection;
    auto it = std::find_if(sel.begin(), sel.end(),
                           [&](const SelectedFrame& s) { return s.frame_index == frame; });
    if (it == sel.end()) throw ControlError("UnknownFrame", UnknownFrame(frame).what());
    batch.push_back(ReviewEdit{frame, it->mes, true, now});
  }

  try {
    session.apply_edits(batch);
  } catch (const UnknownFrame& e) {
    throw ControlError("UnknownFrame", e.what());
  }

  std::string id;
  {
    std::lock_guard lock(state_mu_);
    state_ = LifecycleState::Idle;
    id = session_id_;
    session_id_.clear();
    bundle_.reset();
  }
  live_.reset();
  state_cv_.notify_all();
  bus_.publish(lifecycle_line(LifecycleState::Idle, id));
}

LifecycleState SessionController::state() const {
  std::lock_guard lock(state_mu_);
  return state_;
}

std::string SessionController::active_session() const {
  std::lock_guard lock(state_mu_);
  return session_id_;
}

bool SessionController::wait_for_review(std::chrono::milliseconds timeout) const {
  std::unique_lock lock(state_mu_);
  return state_cv_.wait_for(lock, timeout, [&] { return state_ == LifecycleState::Review; });
}

std::optional<RunStats> SessionController::last_stats() const {
  std::lock_guard lock(state_mu_);
  return last_stats_;
}

}  // namespace hector
