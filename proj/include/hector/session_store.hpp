#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hector/domain.hpp"
#include "hector/temporal.hpp"

namespace hector {

class SessionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class SessionClosed : public SessionError {
 public:
  SessionClosed() : SessionError("session is closed") {}
};
class SessionStillOpen : public SessionError {
 public:
  SessionStillOpen() : SessionError("session is still open") {}
};
class NonMonotonicIndex : public SessionError {
 public:
  explicit NonMonotonicIndex(std::uint64_t index)
      : SessionError("verdict index " + std::to_string(index) + " is not increasing") {}
};
class UnknownFrame : public SessionError {
 public:
  explicit UnknownFrame(std::uint64_t index)
      : SessionError("frame " + std::to_string(index) + " is not in the selection") {}
};
class EmptyLabelList : public std::invalid_argument {
 public:
  EmptyLabelList() : std::invalid_argument("label list is empty") {}
};
class OpenSessionInBatch : public SessionError {
 public:
  explicit OpenSessionInBatch(const std::string& id)
      : SessionError("session " + id + " is still open") {}
};
class IoFailure : public SessionError {
 public:
  using SessionError::SessionError;
};

/// A selected frame as persisted: the image lives in a PNG next to the log.
struct SelectedFrame {
  std::uint64_t frame_index;
  MesScore mes;
  double certainty;
  ProbVector probs;
  std::string image_file;

  bool operator==(const SelectedFrame&) const = default;
};

struct ReviewEdit {
  std::uint64_t frame_index;
  MesScore corrected_mes;
  bool keep_in_journal = false;
  std::string edited_at;

  bool operator==(const ReviewEdit&) const = default;
};

enum class LabelSource { ModelAccepted, ClinicianCorrected };
std::string to_string(LabelSource source);

struct LabeledExample {
  std::string image_path;
  MesScore label;
  LabelSource source;
  std::string session_id;
  std::uint64_t frame_index;

  bool operator==(const LabeledExample&) const = default;
};

struct SessionRecord {
  std::string session_id;
  std::string started_at;
  std::optional<std::string> ended_at;
  std::string source;
  std::string model;
  PipelineConfig config;
  std::vector<FrameVerdict> verdicts;
  std::vector<SmoothedPoint> smoothed;
  std::optional<VideoScore> video_score;
  std::vector<SelectedFrame> selection;
  /// Effective edits, at most one per frame, in order of last application.
  std::vector<ReviewEdit> edits;
  /// Edits superseded by a later edit of the same frame.
  std::vector<ReviewEdit> edit_audit;

  bool closed() const { return ended_at.has_value(); }
  const ReviewEdit* edit_for(std::uint64_t frame_index) const;
  bool operator==(const SessionRecord&) const = default;
};

std::string now_iso8601();
std::string session_file_name(const std::string& session_id);
std::string selection_image_name(const std::string& session_id, std::uint64_t frame_index,
                                 MesScore mes);

/// Modal label; ties resolve to the highest tied class.
MesScore majority_vote(std::span<const MesScore> labels);

/// Append-only session log. Each record is u32 LE payload length, a
/// single-line JSON object, then u32 LE CRC-32 of the payload. A record is
/// acknowledged only after it reached the file.
class Session {
 public:
  struct Options {
    bool sync_each_record = true;
  };

  static Session create(const std::filesystem::path& dir, SessionRecord meta, Options options);
  /// Reopens a closed session for review edits.
  static Session open_for_review(const std::filesystem::path& dir, const std::string& session_id);

  Session(Session&&) noexcept;
  Session& operator=(Session&&) noexcept;
  ~Session();

  void append_verdict(const FrameVerdict& verdict);
  void append_smoothed(const SmoothedPoint& point);
  /// Writes selection, video score and the closing marker.
  void end_session(std::vector<SelectedFrame> selection, std::optional<VideoScore> score,
                   std::string ended_at);
  void apply_edit(const ReviewEdit& edit);
  /// All-or-nothing: any unknown frame rejects the whole batch.
  void apply_edits(std::span<const ReviewEdit> edits);

  const SessionRecord& record() const { return record_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  Session(std::filesystem::path path, int fd, SessionRecord record, Options options);
  void write_record(const std::string& json_line);

  std::filesystem::path path_;
  int fd_ = -1;
  SessionRecord record_;
  Options options_;
};

struct ParsedSession {
  SessionRecord record;
  std::size_t records_read = 0;
  /// Byte length of the valid prefix; shorter than the file on a torn tail.
  std::size_t valid_bytes = 0;
};

/// Reads every complete record; a truncated or corrupt tail ends the parse.
ParsedSession parse_session_log(std::span<const std::uint8_t> bytes);
ParsedSession read_session_file(const std::filesystem::path& path);
std::vector<SessionRecord> load_sessions(const std::filesystem::path& dir);

/// Byte offsets at which each record ends.
std::vector<std::size_t> record_boundaries(std::span<const std::uint8_t> bytes);

/// Serialises a record as a complete log (used for round-trip checks).
std::vector<std::uint8_t> encode_session_log(const SessionRecord& record);

/// Copies selected images into out_dir/images and writes out_dir/manifest.csv
/// ordered by (session_id, frame_index).
std::vector<LabeledExample> export_dataset(std::span<const SessionRecord> sessions,
                                           const std::filesystem::path& session_dir,
                                           const std::filesystem::path& out_dir);

inline constexpr const char* kManifestHeader = "image_path,label,source,session_id,frame_index";

}  // namespace hector
