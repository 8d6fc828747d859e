#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace hector {

inline constexpr std::size_t kNumClasses = 4;

class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One decoded RGB8 frame, row-major, 3 bytes per pixel.
class Frame {
 public:
  Frame(std::uint64_t index, std::int64_t timestamp_ms, int width, int height,
        std::vector<std::uint8_t> pixels);

  std::uint64_t index() const { return index_; }
  std::int64_t timestamp_ms() const { return timestamp_ms_; }
  int width() const { return width_; }
  int height() const { return height_; }
  std::span<const std::uint8_t> pixels() const { return pixels_; }

  const std::uint8_t* pixel(int x, int y) const {
    return pixels_.data() + (static_cast<std::size_t>(y) * width_ + x) * 3;
  }

 private:
  std::uint64_t index_;
  std::int64_t timestamp_ms_;
  int width_;
  int height_;
  std::vector<std::uint8_t> pixels_;
};

/// Unnormalized classifier output, one entry per MES class.
class LogitVector {
 public:
  explicit LogitVector(std::array<double, kNumClasses> values);
  const std::array<double, kNumClasses>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double max() const;
  bool operator==(const LogitVector&) const = default;

 private:
  std::array<double, kNumClasses> values_;
};

class ProbVector {
 public:
  static constexpr double kSumTolerance = 1e-9;

  explicit ProbVector(std::array<double, kNumClasses> values);
  const std::array<double, kNumClasses>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double max() const;
  bool operator==(const ProbVector&) const = default;

 private:
  std::array<double, kNumClasses> values_;
};

class MesScore {
 public:
  explicit MesScore(int value);
  int value() const { return value_; }
  auto operator<=>(const MesScore&) const = default;

 private:
  int value_;
};

/// Index of the largest entry; ties resolve to the higher class index.
int argmax_high_tie(const std::array<double, kNumClasses>& values);

enum class DiscardReason {
  Blur,
  ColourRatio,
  BelowOsrThreshold,
  InferenceUnavailable,
  Dropped,
};

std::string to_string(DiscardReason reason);
DiscardReason discard_reason_from_string(const std::string& name);

struct Discarded {
  DiscardReason reason;
  bool operator==(const Discarded&) const = default;
};

struct Scored {
  MesScore mes;
  ProbVector probs;
  double max_logit;
  double certainty;
  bool operator==(const Scored&) const = default;
};

class FrameVerdict {
 public:
  using Status = std::variant<Discarded, Scored>;

  FrameVerdict(std::uint64_t frame_index, std::int64_t timestamp_ms,
               Status status, std::optional<LogitVector> logits = std::nullopt);

  std::uint64_t frame_index() const { return frame_index_; }
  std::int64_t timestamp_ms() const { return timestamp_ms_; }
  const Status& status() const { return status_; }
  bool is_scored() const { return std::holds_alternative<Scored>(status_); }
  const Scored& scored() const { return std::get<Scored>(status_); }
  const Discarded& discarded() const { return std::get<Discarded>(status_); }
  /// Raw logits whenever inference produced them (kept for replay).
  const std::optional<LogitVector>& logits() const { return logits_; }

  bool operator==(const FrameVerdict&) const = default;

 private:
  std::uint64_t frame_index_;
  std::int64_t timestamp_ms_;
  Status status_;
  std::optional<LogitVector> logits_;
};

struct PipelineConfig {
  double blur_var_min = 50.0;
  double red_ratio_min = 0.35;
  double red_ratio_max = 0.95;
  double osr_tau = 0.0;
  double temperature = 1.0;
  int window = 5;
  int k = 6;
  int min_gap = 30;

  bool operator==(const PipelineConfig&) const = default;
};

/// Every violated invariant of the config; empty iff usable.
std::vector<std::string> validate_config(const PipelineConfig& config);

/// Flat `key = value` text, `#` comments.
std::string serialize_config(const PipelineConfig& config);
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config_file(const std::string& path);

}  // namespace hector
