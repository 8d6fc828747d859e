#include "hector/temporal.hpp"

namespace hector {

SmootherState::SmootherState(int window) : window_(window) {
  if (window < 1) throw DomainError("smoothing window must be >= 1");
}

SmoothedPoint SmootherState::push_scored(const ProbVector& probs, std::uint64_t frame_index) {
  recent_.push_back(probs);
  if (recent_.size() > static_cast<std::size_t>(window_)) recent_.pop_front();

  // W is small; summing the window each time avoids running-sum drift.
  std::array<double, kNumClasses> mean{};
  for (const auto& p : recent_)
    for (std::size_t c = 0; c < kNumClasses; ++c) mean[c] += p[c];
  const double n = static_cast<double>(recent_.size());
  for (double& v : mean) v /= n;

  return SmoothedPoint{frame_index, static_cast<int>(recent_.size()), ProbVector(mean),
                       MesScore(argmax_high_tie(mean))};
}

VideoScore finalize_video_score(std::span<const SmoothedPoint> points) {
  if (points.empty()) throw NoScoredFrames();
  const SmoothedPoint* peak = &points.front();
  for (const auto& p : points) {
    if (p.smoothed_mes > peak->smoothed_mes) peak = &p;
  }
  return VideoScore{peak->smoothed_mes, peak->frame_index, peak->mean_probs};
}

}  // namespace hector
