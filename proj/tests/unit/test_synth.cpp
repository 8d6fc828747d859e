#include "doctest.h"

#include "hector/inference.hpp"
#include "hector/prefilter.hpp"
#include "hector/synth.hpp"

using namespace hector;

namespace {

SynthSpec spec(const std::string& text) { return parse_synth_spec(text); }

}  // namespace

TEST_CASE("synth spec parses and formats") {
  const auto s = spec("seed=7,size=64x48,noise=0.25,model=9,side=16,fps=30,plan=blur:3+u2:5+ood:2+blue:1+black:1");
  CHECK(s.seed == 7);
  CHECK(s.width == 64);
  CHECK(s.height == 48);
  CHECK(s.noise == 0.25);
  CHECK(s.model_seed == 9);
  CHECK(s.input_side == 16);
  CHECK(s.fps == 30);
  REQUIRE(s.plan.size() == 5);
  CHECK(s.plan[1].kind == SegmentKind::Usable);
  CHECK(s.plan[1].mes == 2);
  CHECK(s.frame_count() == 12);

  const auto again = parse_synth_spec(format_synth_spec(s));
  CHECK(format_synth_spec(again) == format_synth_spec(s));
  CHECK(again.plan.size() == s.plan.size());
}

TEST_CASE("synth spec defaults") {
  const auto s = spec("seed=5");
  CHECK(s.model_seed == 5);
  CHECK(s.width == 640);
  CHECK(s.height == 512);
  CHECK_FALSE(s.plan.empty());
  CHECK(s.plan.size() == 9);
}

TEST_CASE("synth spec errors") {
  CHECK_THROWS_AS(spec("seed=x"), DomainError);
  CHECK_THROWS_AS(spec("colour=red"), DomainError);
  CHECK_THROWS_AS(spec("plan=u4:10"), DomainError);
  CHECK_THROWS_AS(spec("plan=u1:0"), DomainError);
  CHECK_THROWS_AS(spec("plan=u1"), DomainError);
  CHECK_THROWS_AS(spec("size=64"), DomainError);
  CHECK_THROWS_AS(SynthStream(spec("noise=1.5")), DomainError);
}

TEST_CASE("same seed gives the same stream") {
  const SynthStream a(spec("seed=3,size=64x64,noise=0.4,plan=u1:4+ood:4+blur:2"));
  const SynthStream b(spec("seed=3,size=64x64,noise=0.4,plan=u1:4+ood:4+blur:2"));
  CHECK(a.usable() == b.usable());
  CHECK(a.planned_scores() == b.planned_scores());
  for (int i = 0; i < a.frame_count(); ++i) {
    const auto fa = a.render(i), fb = b.render(i);
    CHECK(std::equal(fa.pixels().begin(), fa.pixels().end(), fb.pixels().begin()));
  }
  const SynthStream c(spec("seed=4,size=64x64,noise=0.4,plan=u1:4+ood:4+blur:2"));
  CHECK(c.planned_scores() != a.planned_scores());
}

TEST_CASE("labels follow the plan") {
  const SynthStream s(spec("seed=1,size=64x64,plan=blur:2+u3:3+ood:1+u1:2"));
  CHECK(s.usable() == std::vector<bool>{false, false, true, true, true, false, true, true});
  CHECK(s.true_mes()[2] == 3);
  CHECK_FALSE(s.true_mes()[5].has_value());
  CHECK(s.planted_max_class() == 3);
  CHECK_FALSE(SynthStream(spec("seed=1,size=64x64,plan=blur:2")).planted_max_class().has_value());
}

TEST_CASE("planned scores equal the stub's view of rendered frames") {
  // Blocks have even sides, so the pixel texture cancels in every block mean.
  const SynthStream s(spec("seed=11,size=128x64,noise=0.6,plan=u0:3+u1:3+u2:3+u3:3+ood:3+blur:2+blue:2+black:2"));
  const auto model = StubModelSpec::from_seed(11);
  for (int i = 0; i < s.frame_count(); ++i)
    CHECK(stub_infer(s.render(i), model).max() == doctest::Approx(s.planned_scores()[i]).epsilon(1e-9));
}

TEST_CASE("zero-noise usable frames classify as planted") {
  const SynthStream s(spec("seed=12,size=64x64,plan=u0:2+u1:2+u2:2+u3:2"));
  const auto model = StubModelSpec::from_seed(12);
  for (int i = 0; i < s.frame_count(); ++i)
    CHECK(argmax_high_tie(stub_infer(s.render(i), model).values()) == *s.true_mes()[i]);
}

TEST_CASE("suggested gate separates zero-noise frames") {
  const SynthStream s(spec("seed=13,size=64x64,plan=u0:2+u1:2+u2:2+u3:2+ood:4+blur:2+blue:2+black:2"));
  for (int i = 0; i < s.frame_count(); ++i) {
    if (s.usable()[i]) {
      CHECK(s.planned_scores()[i] > s.suggested_tau());
    } else {
      CHECK(s.planned_scores()[i] < s.suggested_tau());
    }
  }
}

TEST_CASE("prefilter sees usable frames as usable and screens the rest") {
  const SynthStream s(spec("seed=14,size=160x128,noise=0.5,plan=u2:3+ood:3+blur:3+blue:3+black:3"));
  PipelineConfig cfg;
  for (int i = 0; i < s.frame_count(); ++i) {
    const auto v = prefilter(s.render(i), cfg);
    const auto kind = s.spec().plan[i / 3].kind;
    if (kind == SegmentKind::Usable || kind == SegmentKind::OutOfBody) {
      CHECK(v.passed);
    } else if (kind == SegmentKind::Blue) {
      CHECK(v.fail_reason == DiscardReason::ColourRatio);
    } else {
      CHECK(v.fail_reason == DiscardReason::Blur);
    }
  }
}

TEST_CASE("timestamps follow the frame rate") {
  const SynthStream a(spec("seed=1,size=8x8,side=4,fps=50,plan=u0:3"));
  CHECK(a.render(2).timestamp_ms() == 40);
  const SynthStream b(spec("seed=1,size=8x8,side=4,plan=u0:3"));
  CHECK(b.render(2).timestamp_ms() == 80);
  CHECK_THROWS_AS(b.render(3), DomainError);
}
