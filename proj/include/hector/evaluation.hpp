#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hector/domain.hpp"

namespace hector {

class EmptyMatrix : public std::invalid_argument {
 public:
  EmptyMatrix() : std::invalid_argument("confusion matrix is empty") {}
};

class SingleClassInput : public std::invalid_argument {
 public:
  explicit SingleClassInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Rows are the true class, columns the predicted class.
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> counts{};

  void add(MesScore truth, MesScore predicted) { ++counts[truth.value()][predicted.value()]; }
  std::uint64_t total() const;
};

double accuracy(const ConfusionMatrix& cm);
double cohen_kappa(const ConfusionMatrix& cm);

/// Mann-Whitney AUROC: chance that a usable frame outscores a non-usable
/// frame, ties counted as one half. `labels` is true for usable frames.
double auroc(std::span<const double> scores, const std::vector<bool>& labels);

struct VideoScores {
  std::string video_id;
  std::vector<double> scores;
  std::vector<bool> labels;
};

struct MacroAuroc {
  double macro;
  std::vector<std::pair<std::string, double>> per_video;
};

/// Unweighted mean of per-video AUROCs.
MacroAuroc macro_auroc(std::span<const VideoScores> videos);

struct RocPoint {
  double tau;
  double tpr;
  double fpr;
  bool operator==(const RocPoint&) const = default;
};

/// One point per distinct score (predict usable iff score >= tau), in
/// increasing tau, plus a closing (+inf, 0, 0) point so the curve spans
/// both corners.
std::vector<RocPoint> roc_sweep(std::span<const double> scores, const std::vector<bool>& labels);

/// Trapezoidal area under a sweep.
double roc_area(std::span<const RocPoint> curve);

std::string roc_csv(std::span<const RocPoint> curve);
std::string auroc_csv(const MacroAuroc& result);

}  // namespace hector
