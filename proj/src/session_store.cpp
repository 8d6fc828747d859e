#include "hector/session_store.hpp"

#include <fcntl.h>
#include <unistd.h>
#include <zlib.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <map>

#include "hector/json_codec.hpp"

namespace hector {

namespace fs = std::filesystem;
using codec::json;

namespace {

std::uint32_t crc_of(std::span<const std::uint8_t> payload) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, payload.data(), static_cast<uInt>(payload.size())));
}

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8 |
         static_cast<std::uint32_t>(b[at + 2]) << 16 | static_cast<std::uint32_t>(b[at + 3]) << 24;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::vector<std::uint8_t> frame_record(const std::string& payload) {
  std::vector<std::uint8_t> out;
  out.reserve(payload.size() + 8);
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
  put_u32(out, crc_of(std::span(reinterpret_cast<const std::uint8_t*>(payload.data()), payload.size())));
  return out;
}

json meta_start_json(const SessionRecord& r) {
  return json{{"type", "meta"},       {"phase", "start"},     {"session_id", r.session_id},
              {"started_at", r.started_at}, {"source", r.source}, {"model", r.model},
              {"config", codec::config_to_json(r.config)}};
}

template <typename T>
json typed(const char* type, T&& body) {
  json j = std::forward<T>(body);
  j["type"] = type;
  return j;
}

void record_edit(SessionRecord& r, const ReviewEdit& edit) {
  auto it = std::find_if(r.edits.begin(), r.edits.end(),
                         [&](const ReviewEdit& e) { return e.frame_index == edit.frame_index; });
  if (it != r.edits.end()) {
    r.edit_audit.push_back(*it);
    r.edits.erase(it);
  }
  r.edits.push_back(edit);
}

/// Folds one log record into the session. Leaves the record untouched when it
/// throws.
void apply_record(SessionRecord& r, const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "meta") {
    const auto phase = j.at("phase").get<std::string>();
    if (phase == "start") {
      auto config = codec::config_from_json(j.at("config"));
      auto id = j.at("session_id").get<std::string>();
      auto started = j.at("started_at").get<std::string>();
      r.source = j.value("source", std::string{});
      r.model = j.value("model", std::string{});
      r.session_id = std::move(id);
      r.started_at = std::move(started);
      r.config = config;
    } else if (phase == "end") {
      r.ended_at = j.at("ended_at").get<std::string>();
    } else {
      throw DomainError("unknown meta phase '" + phase + "'");
    }
  } else if (type == "verdict") {
    FrameVerdict v = codec::verdict_from_json(j);
    if (!r.verdicts.empty() && v.frame_index() <= r.verdicts.back().frame_index()) {
      throw NonMonotonicIndex(v.frame_index());
    }
    r.verdicts.push_back(std::move(v));
  } else if (type == "smoothed") {
    r.smoothed.push_back(codec::smoothed_from_json(j));
  } else if (type == "videoscore") {
    r.video_score = codec::video_score_from_json(j);
  } else if (type == "selection") {
    r.selection.push_back(codec::selected_from_json(j));
  } else if (type == "edit") {
    record_edit(r, codec::edit_from_json(j));
  } else {
    throw DomainError("unknown record type '" + type + "'");
  }
}

std::vector<std::uint8_t> slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot read " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

std::string to_string(LabelSource source) {
  return source == LabelSource::ModelAccepted ? "ModelAccepted" : "ClinicianCorrected";
}

const ReviewEdit* SessionRecord::edit_for(std::uint64_t frame_index) const {
  for (const auto& e : edits)
    if (e.frame_index == frame_index) return &e;
  return nullptr;
}

std::string now_iso8601() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  const std::time_t t = system_clock::to_time_t(now);
  std::tm tm{};
  ::gmtime_r(&t, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

std::string session_file_name(const std::string& session_id) { return "sess" + session_id + ".log"; }

std::string selection_image_name(const std::string& session_id, std::uint64_t frame_index,
                                 MesScore mes) {
  return "sess" + session_id + "_frame" + std::to_string(frame_index) + "_mes" +
         std::to_string(mes.value()) + ".png";
}

MesScore majority_vote(std::span<const MesScore> labels) {
  if (labels.empty()) throw EmptyLabelList();
  std::array<int, kNumClasses> counts{};
  for (auto l : labels) ++counts[l.value()];
  int best = 0;
  for (int c = 1; c < static_cast<int>(kNumClasses); ++c)
    if (counts[c] >= counts[best]) best = c;
  return MesScore(best);
}

Session::Session(fs::path path, int fd, SessionRecord record, Options options)
    : path_(std::move(path)), fd_(fd), record_(std::move(record)), options_(options) {}

Session::Session(Session&& o) noexcept
    : path_(std::move(o.path_)), fd_(o.fd_), record_(std::move(o.record_)), options_(o.options_) {
  o.fd_ = -1;
}

Session& Session::operator=(Session&& o) noexcept {
  if (this != &o) {
    if (fd_ >= 0) ::close(fd_);
    path_ = std::move(o.path_);
    fd_ = o.fd_;
    record_ = std::move(o.record_);
    options_ = o.options_;
    o.fd_ = -1;
  }
  return *this;
}

Session::~Session() {
  if (fd_ >= 0) ::close(fd_);
}

Session Session::create(const fs::path& dir, SessionRecord meta, Options options) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path path = dir / session_file_name(meta.session_id);
  int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw IoFailure("cannot create " + path.string() + ": " + std::strerror(errno));
  SessionRecord fresh;
  Session s(path, fd, std::move(fresh), options);
  const json start = meta_start_json(meta);
  s.write_record(start.dump());
  apply_record(s.record_, start);
  return s;
}

Session Session::open_for_review(const fs::path& dir, const std::string& session_id) {
  const fs::path path = dir / session_file_name(session_id);
  ParsedSession parsed = read_session_file(path);
  int fd = ::open(path.c_str(), O_WRONLY | O_CLOEXEC);
  if (fd < 0) throw IoFailure("cannot open " + path.string() + ": " + std::strerror(errno));
  // Drop any torn tail so new records follow the last valid one.
  if (::ftruncate(fd, static_cast<off_t>(parsed.valid_bytes)) != 0 ||
      ::lseek(fd, 0, SEEK_END) < 0) {
    ::close(fd);
    throw IoFailure("cannot reposition " + path.string());
  }
  return Session(path, fd, std::move(parsed.record), Options{});
}

void Session::write_record(const std::string& payload) {
  const auto bytes = frame_record(payload);
  std::size_t done = 0;
  while (done < bytes.size()) {
    ssize_t n = ::write(fd_, bytes.data() + done, bytes.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoFailure(std::string("session write failed: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
  if (options_.sync_each_record && ::fdatasync(fd_) != 0) {
    throw IoFailure(std::string("session sync failed: ") + std::strerror(errno));
  }
}

void Session::append_verdict(const FrameVerdict& verdict) {
  if (record_.closed()) throw SessionClosed();
  if (!record_.verdicts.empty() && verdict.frame_index() <= record_.verdicts.back().frame_index()) {
    throw NonMonotonicIndex(verdict.frame_index());
  }
  write_record(typed("verdict", codec::verdict_to_json(verdict)).dump());
  record_.verdicts.push_back(verdict);
}

void Session::append_smoothed(const SmoothedPoint& point) {
  if (record_.closed()) throw SessionClosed();
  write_record(typed("smoothed", codec::smoothed_to_json(point)).dump());
  record_.smoothed.push_back(point);
}

void Session::end_session(std::vector<SelectedFrame> selection, std::optional<VideoScore> score,
                          std::string ended_at) {
  if (record_.closed()) throw SessionClosed();
  const bool any_scored = std::any_of(record_.verdicts.begin(), record_.verdicts.end(),
                                      [](const FrameVerdict& v) { return v.is_scored(); });
  if (any_scored != score.has_value()) {
    throw DomainError("video score must be present iff some frame was scored");
  }
  for (const auto& s : selection) {
    write_record(typed("selection", codec::selected_to_json(s)).dump());
    record_.selection.push_back(s);
  }
  if (score) {
    write_record(typed("videoscore", codec::video_score_to_json(*score)).dump());
    record_.video_score = score;
  }
  write_record(json{{"type", "meta"}, {"phase", "end"}, {"ended_at", ended_at}}.dump());
  record_.ended_at = std::move(ended_at);
  if (!options_.sync_each_record) ::fdatasync(fd_);
}

void Session::apply_edit(const ReviewEdit& edit) { apply_edits(std::span(&edit, 1)); }

void Session::apply_edits(std::span<const ReviewEdit> edits) {
  if (!record_.closed()) throw SessionStillOpen();
  for (const auto& e : edits) {
    const bool known = std::any_of(record_.selection.begin(), record_.selection.end(),
                                   [&](const SelectedFrame& s) { return s.frame_index == e.frame_index; });
    if (!known) throw UnknownFrame(e.frame_index);
  }
  for (const auto& e : edits) {
    write_record(typed("edit", codec::edit_to_json(e)).dump());
    record_edit(record_, e);
  }
}

ParsedSession parse_session_log(std::span<const std::uint8_t> bytes) {
  ParsedSession out;
  std::size_t at = 0;
  while (bytes.size() - at >= 8) {
    const std::uint32_t len = read_u32(bytes, at);
    if (bytes.size() - at - 8 < len) break;
    const auto payload = bytes.subspan(at + 4, len);
    if (read_u32(bytes, at + 4 + len) != crc_of(payload)) break;
    json j = json::parse(payload.begin(), payload.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) break;
    try {
      apply_record(out.record, j);
    } catch (const std::exception&) {
      break;
    }
    at += 8 + len;
    ++out.records_read;
    out.valid_bytes = at;
  }
  return out;
}

ParsedSession read_session_file(const fs::path& path) { return parse_session_log(slurp(path)); }

std::vector<std::size_t> record_boundaries(std::span<const std::uint8_t> bytes) {
  std::vector<std::size_t> out;
  std::size_t at = 0;
  while (bytes.size() - at >= 8) {
    const std::uint32_t len = read_u32(bytes, at);
    if (bytes.size() - at - 8 < len) break;
    at += 8 + len;
    out.push_back(at);
  }
  return out;
}

std::vector<std::uint8_t> encode_session_log(const SessionRecord& r) {
  std::vector<std::uint8_t> out;
  auto emit = [&](const json& j) {
    const auto rec = frame_record(j.dump());
    out.insert(out.end(), rec.begin(), rec.end());
  };
  emit(meta_start_json(r));
  for (const auto& v : r.verdicts) emit(typed("verdict", codec::verdict_to_json(v)));
  for (const auto& p : r.smoothed) emit(typed("smoothed", codec::smoothed_to_json(p)));
  for (const auto& s : r.selection) emit(typed("selection", codec::selected_to_json(s)));
  if (r.video_score) emit(typed("videoscore", codec::video_score_to_json(*r.video_score)));
  if (r.ended_at) emit(json{{"type", "meta"}, {"phase", "end"}, {"ended_at", *r.ended_at}});
  // Superseded edits must precede the effective ones to replay correctly;
  // emitting audit entries first and effective edits last reproduces both lists.
  for (const auto& e : r.edit_audit) emit(typed("edit", codec::edit_to_json(e)));
  for (const auto& e : r.edits) emit(typed("edit", codec::edit_to_json(e)));
  return out;
}

std::vector<SessionRecord> load_sessions(const fs::path& dir) {
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.rfind("sess", 0) == 0 && entry.path().extension() == ".log") {
      files.push_back(entry.path());
    }
  }
  if (ec) throw IoFailure("cannot list " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());
  std::vector<SessionRecord> out;
  for (const auto& f : files) out.push_back(read_session_file(f).record);
  return out;
}

std::vector<LabeledExample> export_dataset(std::span<const SessionRecord> sessions,
                                           const fs::path& session_dir, const fs::path& out_dir) {
  for (const auto& s : sessions)
    if (!s.closed()) throw OpenSessionInBatch(s.session_id);

  std::vector<LabeledExample> rows;
  std::vector<std::pair<fs::path, fs::path>> copies;
  for (const auto& s : sessions) {
    for (const auto& sel : s.selection) {
      const ReviewEdit* edit = s.edit_for(sel.frame_index);
      const MesScore label = edit ? edit->corrected_mes : sel.mes;
      const LabelSource source = edit && edit->corrected_mes != sel.mes
                                     ? LabelSource::ClinicianCorrected
                                     : LabelSource::ModelAccepted;
      rows.push_back({"images/" + sel.image_file, label, source, s.session_id, sel.frame_index});
      copies.emplace_back(session_dir / sel.image_file, out_dir / "images" / sel.image_file);
    }
  }
  std::sort(rows.begin(), rows.end(), [](const LabeledExample& a, const LabeledExample& b) {
    return std::tie(a.session_id, a.frame_index) < std::tie(b.session_id, b.frame_index);
  });

  std::error_code ec;
  fs::create_directories(out_dir / "images", ec);
  if (ec) throw IoFailure("cannot create " + (out_dir / "images").string() + ": " + ec.message());
  for (const auto& [from, to] : copies) {
    fs::copy_file(from, to, fs::copy_options::overwrite_existing, ec);
    if (ec) throw IoFailure("cannot copy " + from.string() + ": " + ec.message());
  }

  std::ofstream manifest(out_dir / "manifest.csv", std::ios::binary | std::ios::trunc);
  if (!manifest) throw IoFailure("cannot write manifest in " + out_dir.string());
  manifest << kManifestHeader << '\n';
  for (const auto& r : rows) {
    manifest << r.image_path << ',' << r.label.value() << ',' << to_string(r.source) << ','
             << r.session_id << ',' << r.frame_index << '\n';
  }
  if (!manifest.flush()) throw IoFailure("manifest write failed");
  return rows;
}

}  // namespace hector
