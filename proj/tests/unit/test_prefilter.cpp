#include "doctest.h"

#include <random>

#include "hector/prefilter.hpp"
#include "oracles.hpp"

using namespace hector;

namespace {

Frame checkerboard(int n, std::uint8_t lo, std::uint8_t hi) {
  std::vector<std::uint8_t> px;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const std::uint8_t v = ((x + y) % 2) ? hi : lo;
      px.insert(px.end(), {v, v, v});
    }
  return Frame(0, 0, n, n, std::move(px));
}

Frame box_blur(const Frame& f) {
  std::vector<std::uint8_t> px(f.pixels().begin(), f.pixels().end());
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x)
      for (int c = 0; c < 3; ++c) {
        int sum = 0, n = 0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int xx = x + dx, yy = y + dy;
            if (xx < 0 || yy < 0 || xx >= f.width() || yy >= f.height()) continue;
            sum += f.pixel(xx, yy)[c];
            ++n;
          }
        px[(static_cast<std::size_t>(y) * f.width() + x) * 3 + c] = static_cast<std::uint8_t>(sum / n);
      }
  return Frame(0, 0, f.width(), f.height(), std::move(px));
}

}  // namespace

TEST_CASE("uniform frames have zero laplacian variance") {
  CHECK(laplacian_variance(oracle::solid_frame(16, 9, 200, 30, 10)) == 0.0);
}

TEST_CASE("frames below 3x3 report zero") {
  CHECK(laplacian_variance(Frame(0, 0, 2, 5, std::vector<std::uint8_t>(30, 255))) == 0.0);
}

TEST_CASE("single interior response has zero variance") {
  std::vector<std::uint8_t> px(27, 0);
  px[12] = px[13] = px[14] = 255;
  const Frame f(0, 0, 3, 3, px);
  CHECK(laplacian_variance(f) == doctest::Approx(oracle::laplacian_variance(f)));
  CHECK(laplacian_variance(f) == 0.0);
}

TEST_CASE("laplacian variance matches the convolution oracle") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const int w = 1 + static_cast<int>(rng() % 32);
    const int h = 1 + static_cast<int>(rng() % 32);
    const auto f = oracle::random_frame(rng, w, h);
    const double want = oracle::laplacian_variance(f);
    const double got = laplacian_variance(f);
    CHECK(std::abs(got - want) <= 1e-9 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("checkerboard is sharper than its blur") {
  const auto board = checkerboard(16, 0, 255);
  CHECK(laplacian_variance(board) > laplacian_variance(box_blur(board)));
}

TEST_CASE("scaling intensities by c scales variance by c squared") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 20; ++i) {
    std::vector<std::uint8_t> px(24 * 24 * 3);
    for (auto& p : px) p = static_cast<std::uint8_t>(rng() % 64);
    const int c = 2 + static_cast<int>(rng() % 3);
    auto scaled = px;
    for (auto& p : scaled) p = static_cast<std::uint8_t>(p * c);
    const double a = laplacian_variance(Frame(0, 0, 24, 24, px));
    const double b = laplacian_variance(Frame(0, 0, 24, 24, scaled));
    CHECK(b == doctest::Approx(a * c * c).epsilon(1e-6));
  }
}

TEST_CASE("red ratio examples") {
  CHECK(red_ratio(oracle::solid_frame(4, 4, 200, 0, 0)) == 1.0);
  CHECK(red_ratio(oracle::solid_frame(4, 4, 77, 77, 77)) == doctest::Approx(1.0 / 3));
  CHECK(red_ratio(oracle::solid_frame(4, 4, 0, 0, 0)) == doctest::Approx(1.0 / 3));
  CHECK(red_ratio(oracle::solid_frame(4, 4, 120, 60, 20)) == doctest::Approx(0.6));
}

TEST_CASE("red ratio ignores pixel positions") {
  std::mt19937_64 rng(13);
  auto f = oracle::random_frame(rng, 10, 7);
  std::vector<std::array<std::uint8_t, 3>> pixels;
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 10; ++x) pixels.push_back({f.pixel(x, y)[0], f.pixel(x, y)[1], f.pixel(x, y)[2]});
  std::shuffle(pixels.begin(), pixels.end(), rng);
  std::vector<std::uint8_t> px;
  for (auto& p : pixels) px.insert(px.end(), p.begin(), p.end());
  CHECK(red_ratio(Frame(0, 0, 10, 7, px)) == doctest::Approx(red_ratio(f)).epsilon(1e-12));
}

TEST_CASE("prefilter verdicts") {
  PipelineConfig cfg;
  SUBCASE("uniform gray fails blur") {
    const auto v = prefilter(oracle::solid_frame(8, 8, 100, 100, 100), cfg);
    CHECK_FALSE(v.passed);
    CHECK(v.fail_reason == DiscardReason::Blur);
    CHECK(v.red_ratio == doctest::Approx(1.0 / 3));
  }
  SUBCASE("sharp red checkerboard passes") {
    std::vector<std::uint8_t> px;
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) {
        const bool on = (x + y) % 2;
        px.insert(px.end(), {static_cast<std::uint8_t>(on ? 220 : 120), 40, 30});
      }
    const Frame f(0, 0, 16, 16, px);
    const auto v = prefilter(f, cfg);
    CHECK(oracle::laplacian_variance(f) > cfg.blur_var_min);
    CHECK(v.passed);
    CHECK_FALSE(v.fail_reason.has_value());
  }
  SUBCASE("sharp blue fails colour ratio") {
    std::vector<std::uint8_t> px;
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) px.insert(px.end(), {0, 0, static_cast<std::uint8_t>((x + y) % 2 ? 255 : 0)});
    const auto v = prefilter(Frame(0, 0, 16, 16, px), cfg);
    CHECK(v.fail_reason == DiscardReason::ColourRatio);
    CHECK(v.red_ratio == 0.0);
  }
  SUBCASE("failing both checks reports blur") {
    const auto v = prefilter(oracle::solid_frame(8, 8, 0, 0, 200), cfg);
    CHECK(v.fail_reason == DiscardReason::Blur);
    CHECK(v.red_ratio == 0.0);
  }
}
