#include "hector/prefilter.hpp"

#include <vector>

namespace hector {

namespace {

std::vector<double> luma_plane(const Frame& frame) {
  const auto px = frame.pixels();
  std::vector<double> luma(static_cast<std::size_t>(frame.width()) * frame.height());
  for (std::size_t i = 0; i < luma.size(); ++i) {
    luma[i] = 0.299 * px[3 * i] + 0.587 * px[3 * i + 1] + 0.114 * px[3 * i + 2];
  }
  return luma;
}

}  // namespace

double laplacian_variance(const Frame& frame) {
  const int w = frame.width();
  const int h = frame.height();
  if (w < 3 || h < 3) return 0.0;
  const auto luma = luma_plane(frame);

  auto response = [&](int x, int y) {
    const std::size_t c = static_cast<std::size_t>(y) * w + x;
    return luma[c - w] + luma[c + w] + luma[c - 1] + luma[c + 1] - 4.0 * luma[c];
  };

  // Two passes keep the variance exact for responses with a large mean.
  const double n = static_cast<double>(w - 2) * (h - 2);
  double sum = 0.0;
  for (int y = 1; y < h - 1; ++y)
    for (int x = 1; x < w - 1; ++x) sum += response(x, y);
  const double mean = sum / n;

  double sq = 0.0;
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const double d = response(x, y) - mean;
      sq += d * d;
    }
  }
  return sq / n;
}

double red_ratio(const Frame& frame) {
  const auto px = frame.pixels();
  std::uint64_t sums[3] = {0, 0, 0};
  for (std::size_t i = 0; i < px.size(); i += 3) {
    sums[0] += px[i];
    sums[1] += px[i + 1];
    sums[2] += px[i + 2];
  }
  const std::uint64_t total = sums[0] + sums[1] + sums[2];
  if (total == 0) return 1.0 / 3.0;
  // The common pixel count cancels out of the ratio of means.
  return static_cast<double>(sums[0]) / static_cast<double>(total);
}

PrefilterVerdict prefilter(const Frame& frame, const PipelineConfig& config) {
  PrefilterVerdict v{true, laplacian_variance(frame), red_ratio(frame), std::nullopt};
  if (v.blur_variance < config.blur_var_min) {
    v.fail_reason = DiscardReason::Blur;
  } else if (v.red_ratio < config.red_ratio_min || v.red_ratio > config.red_ratio_max) {
    v.fail_reason = DiscardReason::ColourRatio;
  }
  v.passed = !v.fail_reason.has_value();
  return v;
}

}  // namespace hector
