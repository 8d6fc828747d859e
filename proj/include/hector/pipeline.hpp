#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "hector/domain.hpp"
#include "hector/inference.hpp"
#include "hector/osr.hpp"
#include "hector/prefilter.hpp"
#include "hector/selection.hpp"
#include "hector/temporal.hpp"

namespace hector {

struct ProcessOutcome {
  FrameVerdict verdict;
  std::optional<SmoothedPoint> smoothed;
  std::optional<PrefilterVerdict> quality;
};

/// The ordered per-frame chain: prefilter, inference, open-set gate,
/// smoothing and frame selection. Single owner; not thread-safe.
class FrameProcessor {
 public:
  FrameProcessor(const PipelineConfig& config, LogitProvider& provider);

  ProcessOutcome process(std::shared_ptr<const Frame> frame);
  /// Verdict for a frame that never reached the chain (queue overflow).
  FrameVerdict dropped(std::uint64_t frame_index, std::int64_t timestamp_ms) const;

  const PipelineConfig& config() const { return config_; }
  const std::vector<SmoothedPoint>& smoothed() const { return smoothed_; }
  const SelectionState& selection() const { return selection_; }
  /// nullopt when nothing was scored.
  std::optional<VideoScore> video_score() const;

 private:
  PipelineConfig config_;
  CalibrationModel calibration_;
  LogitProvider& provider_;
  SmootherState smoother_;
  SelectionState selection_;
  std::vector<SmoothedPoint> smoothed_;
};

/// Max raw logit of a verdict for usability ranking; frames that never
/// reached inference rank lowest (-inf).
double usability_score(const FrameVerdict& verdict);

}  // namespace hector
