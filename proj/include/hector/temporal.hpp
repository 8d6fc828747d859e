#pragma once

#include <deque>
#include <span>
#include <stdexcept>

#include "hector/domain.hpp"

namespace hector {

struct SmoothedPoint {
  std::uint64_t frame_index;
  int window_fill;
  ProbVector mean_probs;
  MesScore smoothed_mes;

  bool operator==(const SmoothedPoint&) const = default;
};

struct VideoScore {
  MesScore overall_mes;
  std::uint64_t peak_frame_index;
  ProbVector peak_probs;

  bool operator==(const VideoScore&) const = default;
};

class NoScoredFrames : public std::runtime_error {
 public:
  NoScoredFrames() : std::runtime_error("no scored frames; video is unscorable") {}
};

/// Rolling mean over the last W scored frames. Discarded frames never
/// enter the window and never reset it.
class SmootherState {
 public:
  explicit SmootherState(int window);

  SmoothedPoint push_scored(const ProbVector& probs, std::uint64_t frame_index);
  int window() const { return window_; }

 private:
  int window_;
  std::deque<ProbVector> recent_;
};

/// Maximum smoothed MES; the peak is the earliest point that attains it.
VideoScore finalize_video_score(std::span<const SmoothedPoint> points);

}  // namespace hector
