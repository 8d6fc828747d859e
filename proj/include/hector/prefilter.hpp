#pragma once

#include <optional>

#include "hector/domain.hpp"

namespace hector {

struct PrefilterVerdict {
  bool passed;
  double blur_variance;
  double red_ratio;
  std::optional<DiscardReason> fail_reason;  // Blur or ColourRatio
};

/// Population variance of the 4-neighbour Laplacian response of the luma
/// image, interior pixels only. Frames smaller than 3x3 yield 0.
double laplacian_variance(const Frame& frame);

/// mean(R) / (mean(R) + mean(G) + mean(B)); 1/3 for an all-black frame.
double red_ratio(const Frame& frame);

/// Blur is checked before colour ratio; both metrics are always filled in.
PrefilterVerdict prefilter(const Frame& frame, const PipelineConfig& config);

}  // namespace hector
