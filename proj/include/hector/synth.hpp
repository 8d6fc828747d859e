#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hector/domain.hpp"
#include "hector/inference.hpp"

namespace hector {

enum class SegmentKind {
  Usable,     // sharp, red-tinted, content aligned with one MES class
  Blur,       // smooth gradient, no texture
  Blue,       // sharp but blue-dominated
  Black,      // all zero
  OutOfBody,  // sharp and red but content not aligned with any class
};

struct Segment {
  SegmentKind kind;
  int length;
  int mes = 0;  // Usable only
};

struct SynthSpec {
  std::uint64_t seed = 1;
  int width = 640;
  int height = 512;
  /// 0 gives perfectly separable usable/non-usable frames.
  double noise = 0.0;
  std::uint64_t model_seed = 1;
  int input_side = 32;
  /// Source pacing in frames per second; 0 means unpaced.
  double fps = 0.0;
  std::vector<Segment> plan;

  int frame_count() const;
};

/// "seed=7,size=640x512,noise=0.1,model=7,fps=30,plan=blur:10+u0:40+ood:10+u3:40".
/// Plan tokens: u<mes>:<n>, blur:<n>, blue:<n>, black:<n>, ood:<n>.
SynthSpec parse_synth_spec(const std::string& text);
std::string format_synth_spec(const SynthSpec& spec);

/// Random alternation of usable and non-usable segments.
std::vector<Segment> random_plan(std::uint64_t seed, int usable_segments, int segment_length);

/// A deterministic synthetic video. Frames are rendered on demand because a
/// full-resolution stream does not fit in memory.
class SynthStream {
 public:
  explicit SynthStream(SynthSpec spec);

  const SynthSpec& spec() const { return spec_; }
  int frame_count() const { return static_cast<int>(usable_.size()); }
  Frame render(int index) const;

  /// Per-frame usable/non-usable ground truth.
  const std::vector<bool>& usable() const { return usable_; }
  /// Planted MES per frame; nullopt for non-usable frames.
  const std::vector<std::optional<int>>& true_mes() const { return true_mes_; }
  /// Max stub logit the generator planned for each frame.
  const std::vector<double>& planned_scores() const { return planned_scores_; }
  /// Highest planted class over usable frames, if any.
  std::optional<int> planted_max_class() const;
  /// Gate threshold halfway between the noise-free templates.
  double suggested_tau() const { return suggested_tau_; }

 private:
  struct FramePlan {
    SegmentKind kind;
    int mes;
    double amplitude;
    std::uint64_t rng_seed;
  };

  std::vector<double> block_targets(const FramePlan& plan) const;

  SynthSpec spec_;
  StubModelSpec model_;
  std::vector<std::vector<double>> class_directions_;
  std::vector<FramePlan> frames_;
  std::vector<bool> usable_;
  std::vector<std::optional<int>> true_mes_;
  std::vector<double> planned_scores_;
  double suggested_tau_ = 0.0;
};

}  // namespace hector
