#include "hector/pipeline.hpp"

#include <limits>

namespace hector {

namespace {

void require_valid(const PipelineConfig& config) {
  const auto problems = validate_config(config);
  if (!problems.empty()) throw DomainError("invalid pipeline config: " + problems.front());
}

}  // namespace

FrameProcessor::FrameProcessor(const PipelineConfig& config, LogitProvider& provider)
    : config_((require_valid(config), config)),
      calibration_(config.temperature),
      provider_(provider),
      smoother_(config.window),
      selection_(config.k, config.min_gap) {}

ProcessOutcome FrameProcessor::process(std::shared_ptr<const Frame> frame) {
  const auto index = frame->index();
  const auto ts = frame->timestamp_ms();
  auto quality = prefilter(*frame, config_);
  if (!quality.passed) {
    return {FrameVerdict(index, ts, Discarded{*quality.fail_reason}), std::nullopt, quality};
  }

  std::optional<LogitVector> logits;
  try {
    logits = provider_.infer(*frame);
  } catch (const InferenceError&) {
    return {FrameVerdict(index, ts, Discarded{DiscardReason::InferenceUnavailable}), std::nullopt,
            quality};
  }

  const GateDecision gate = gate_and_classify(*logits, calibration_, config_.osr_tau);
  if (!gate.in_distribution) {
    return {FrameVerdict(index, ts, Discarded{DiscardReason::BelowOsrThreshold}, logits),
            std::nullopt, quality};
  }

  const SmoothedPoint point = smoother_.push_scored(*gate.probs, index);
  smoothed_.push_back(point);
  selection_.offer(SelectionEntry(index, point.smoothed_mes, *gate.probs, std::move(frame)));

  FrameVerdict verdict(index, ts, Scored{*gate.mes, *gate.probs, gate.max_logit, *gate.certainty},
                       logits);
  return {std::move(verdict), point, quality};
}

FrameVerdict FrameProcessor::dropped(std::uint64_t frame_index, std::int64_t timestamp_ms) const {
  return FrameVerdict(frame_index, timestamp_ms, Discarded{DiscardReason::Dropped});
}

std::optional<VideoScore> FrameProcessor::video_score() const {
  if (smoothed_.empty()) return std::nullopt;
  return finalize_video_score(smoothed_);
}

double usability_score(const FrameVerdict& verdict) {
  if (verdict.logits()) return verdict.logits()->max();
  return -std::numeric_limits<double>::infinity();
}

}  // namespace hector
