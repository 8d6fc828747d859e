#include "doctest.h"

#include <limits>
#include <random>

#include "hector/domain.hpp"

using namespace hector;

TEST_CASE("frame rejects bad geometry") {
  CHECK_THROWS_AS(Frame(0, 0, 0, 4, {}), DomainError);
  CHECK_THROWS_AS(Frame(0, 0, 2, 2, std::vector<std::uint8_t>(11)), DomainError);
  Frame f(3, 40, 2, 1, {1, 2, 3, 4, 5, 6});
  CHECK(f.pixel(1, 0)[0] == 4);
  CHECK(f.index() == 3);
}

TEST_CASE("logit and probability vectors validate their contents") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(LogitVector({0, nan, 0, 0}), DomainError);
  CHECK_THROWS_AS(LogitVector({0, inf, 0, 0}), DomainError);
  CHECK(LogitVector({1, -2, 3, 0}).max() == 3);

  CHECK_NOTHROW(ProbVector({0.25, 0.25, 0.25, 0.25}));
  CHECK_NOTHROW(ProbVector({0.5, 0.5 + 5e-10, 0, 0}));
  CHECK_THROWS_AS(ProbVector({0.5, 0.6, 0, 0}), DomainError);
  CHECK_THROWS_AS(ProbVector({1.1, -0.1, 0, 0}), DomainError);
}

TEST_CASE("mes is limited to 0..3") {
  for (int m = 0; m < 4; ++m) CHECK(MesScore(m).value() == m);
  CHECK_THROWS_AS(MesScore(-1), DomainError);
  CHECK_THROWS_AS(MesScore(4), DomainError);
  CHECK(MesScore(3) > MesScore(2));
}

TEST_CASE("argmax ties go to the higher class") {
  CHECK(argmax_high_tie({0, 0, 2.5, 2.5}) == 3);
  CHECK(argmax_high_tie({1, 1, 1, 1}) == 3);
  CHECK(argmax_high_tie({4, 1, 1, 1}) == 0);
  CHECK(argmax_high_tie({1, 4, 4, 1}) == 2);
}

TEST_CASE("discard reasons round-trip through their names") {
  for (auto r : {DiscardReason::Blur, DiscardReason::ColourRatio, DiscardReason::BelowOsrThreshold,
                 DiscardReason::InferenceUnavailable, DiscardReason::Dropped}) {
    CHECK(discard_reason_from_string(to_string(r)) == r);
  }
  CHECK_THROWS_AS(discard_reason_from_string("tired"), DomainError);
}

TEST_CASE("scored verdict certainty must be the top probability") {
  ProbVector p({0.7, 0.1, 0.1, 0.1});
  CHECK_NOTHROW(FrameVerdict(0, 0, Scored{MesScore(0), p, 2.0, 0.7}));
  CHECK_THROWS_AS(FrameVerdict(0, 0, Scored{MesScore(0), p, 2.0, 0.6}), DomainError);
}

TEST_CASE("config validation names every violated field") {
  CHECK(validate_config(PipelineConfig{}).empty());
  PipelineConfig c;
  c.temperature = 0;
  c.window = 0;
  c.k = 0;
  c.min_gap = -1;
  c.red_ratio_min = 0.9;
  c.red_ratio_max = 0.5;
  const auto v = validate_config(c);
  CHECK(v.size() == 5);
  CHECK(v[0] == "temperature must be > 0");
  CHECK(v[1] == "window must be >= 1");
  CHECK(v[2] == "k must be >= 1");

  PipelineConfig t;
  t.temperature = -1;
  CHECK(validate_config(t) == std::vector<std::string>{"temperature must be > 0"});
}

TEST_CASE("config text round-trips") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-100, 100);
  for (int i = 0; i < 50; ++i) {
    PipelineConfig c;
    c.blur_var_min = std::abs(u(rng));
    c.osr_tau = u(rng);
    c.temperature = std::abs(u(rng)) + 1e-3;
    c.window = 1 + static_cast<int>(rng() % 20);
    c.k = 1 + static_cast<int>(rng() % 20);
    c.min_gap = static_cast<int>(rng() % 100);
    CHECK(parse_config(serialize_config(c)) == c);
  }
}

TEST_CASE("config parser accepts comments and partial files") {
  const auto c = parse_config("# calibration\n  temperature = 1.5  # fitted\n\nk=3\n");
  CHECK(c.temperature == 1.5);
  CHECK(c.k == 3);
  CHECK(c.window == PipelineConfig{}.window);
  CHECK_THROWS_AS(parse_config("wndow = 3\n"), DomainError);
  CHECK_THROWS_AS(parse_config("window 3\n"), DomainError);
  CHECK_THROWS_AS(parse_config("window = three\n"), DomainError);
  CHECK_THROWS_AS(load_config_file("/nonexistent/hector.conf"), DomainError);
}
