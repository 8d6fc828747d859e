#include "doctest.h"

#include "hector/json_codec.hpp"
#include "hector/pipeline.hpp"
#include "hector/synth.hpp"
#include "oracles.hpp"

using namespace hector;

namespace {

class FixedProvider : public LogitProvider {
 public:
  explicit FixedProvider(std::vector<std::array<double, 4>> seq) : seq_(std::move(seq)) {}
  std::string name() const override { return "fixed"; }
  InputSize expected_input() const override { return {0, 0}; }
  LogitVector infer(const Frame& f) override {
    if (fail_on_ && f.index() == *fail_on_) throw TransportError("down");
    return LogitVector(seq_[f.index() % seq_.size()]);
  }
  std::optional<std::uint64_t> fail_on_;

 private:
  std::vector<std::array<double, 4>> seq_;
};

std::shared_ptr<const Frame> sharp_red(std::uint64_t index) {
  std::vector<std::uint8_t> px;
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) px.insert(px.end(), {static_cast<std::uint8_t>((x + y) % 2 ? 230 : 110), 50, 40});
  return std::make_shared<const Frame>(index, static_cast<std::int64_t>(index) * 40, 16, 16, px);
}

std::shared_ptr<const Frame> flat(std::uint64_t index) {
  return std::make_shared<const Frame>(oracle::solid_frame(16, 16, 150, 60, 50, index));
}

}  // namespace

TEST_CASE("processor rejects invalid config") {
  FixedProvider p({{0, 0, 0, 0}});
  PipelineConfig c;
  c.window = 0;
  CHECK_THROWS_AS(FrameProcessor(c, p), DomainError);
}

TEST_CASE("every stage can discard") {
  FixedProvider p({{5, 0, 0, 0}, {-1, -2, -1, -3}});
  PipelineConfig c;
  c.osr_tau = 1.0;
  FrameProcessor proc(c, p);

  auto blur = proc.process(flat(0));
  CHECK(blur.verdict.discarded().reason == DiscardReason::Blur);
  CHECK_FALSE(blur.verdict.logits().has_value());
  CHECK(blur.quality.has_value());

  auto scored = proc.process(sharp_red(2));  // index 2 -> {5,0,0,0}
  REQUIRE(scored.verdict.is_scored());
  CHECK(scored.verdict.scored().mes.value() == 0);
  CHECK(scored.verdict.scored().max_logit == 5);
  CHECK(scored.smoothed.has_value());

  auto low = proc.process(sharp_red(3));  // {-1,-2,-1,-3}
  CHECK(low.verdict.discarded().reason == DiscardReason::BelowOsrThreshold);
  CHECK(low.verdict.logits().has_value());
  CHECK_FALSE(low.smoothed.has_value());

  p.fail_on_ = 4;
  auto down = proc.process(sharp_red(4));
  CHECK(down.verdict.discarded().reason == DiscardReason::InferenceUnavailable);

  const auto drop = proc.dropped(5, 200);
  CHECK(drop.discarded().reason == DiscardReason::Dropped);
  CHECK(proc.smoothed().size() == 1);
}

TEST_CASE("usability score is the raw max logit") {
  CHECK(usability_score(FrameVerdict(0, 0, Discarded{DiscardReason::BelowOsrThreshold},
                                     LogitVector({-1, 2, 0, 0}))) == 2);
  CHECK(std::isinf(usability_score(FrameVerdict(0, 0, Discarded{DiscardReason::Blur}))));
}

TEST_CASE("discarded frames do not enter the window") {
  FixedProvider p({{0, 4, 0, 0}, {0, 0, 0, 4}});
  PipelineConfig c;
  c.window = 2;
  c.osr_tau = -10;
  FrameProcessor proc(c, p);
  proc.process(sharp_red(0));
  proc.process(flat(1));
  auto out = proc.process(sharp_red(3));
  REQUIRE(out.smoothed);
  CHECK(out.smoothed->window_fill == 2);
  CHECK(out.smoothed->mean_probs[1] == doctest::Approx(out.smoothed->mean_probs[3]));
}

TEST_CASE("selected entries carry the smoothed mes") {
  FixedProvider p({{0, 0, 0, 0}});
  PipelineConfig c;
  c.window = 3;
  c.min_gap = 0;
  c.k = 10;
  std::vector<std::array<double, 4>> seq{{0, 0, 9, 0}, {0, 0, 9, 0}, {9, 0, 0, 0}};
  FixedProvider q(seq);
  FrameProcessor proc(c, q);
  for (std::uint64_t i = 0; i < 3; ++i) proc.process(sharp_red(i));
  const auto sel = final_selection(proc.selection());
  REQUIRE(sel.size() == 3);
  CHECK(sel[2].mes.value() == 2);
  CHECK(argmax_high_tie(sel[2].probs.values()) == 0);
  CHECK(sel[2].image != nullptr);
}

TEST_CASE("video score is absent when nothing scored") {
  FixedProvider p({{0, 0, 0, 0}});
  FrameProcessor proc(PipelineConfig{}, p);
  proc.process(flat(0));
  CHECK_FALSE(proc.video_score().has_value());
}

TEST_CASE("replaying logged logits reproduces verdicts exactly") {
  const SynthStream s(parse_synth_spec("seed=21,size=96x64,noise=0.5,plan=u1:20+ood:10+blur:5+u3:20"));
  PipelineConfig c;
  c.osr_tau = s.suggested_tau();
  StubProvider stub(StubModelSpec::from_seed(21));
  FrameProcessor live(c, stub);
  std::vector<FrameVerdict> first;
  std::map<std::uint64_t, LogitVector> logged;
  for (int i = 0; i < s.frame_count(); ++i) {
    auto out = live.process(std::make_shared<const Frame>(s.render(i)));
    // what the session log keeps
    const auto stored = codec::verdict_from_json(nlohmann::json::parse(codec::verdict_to_json(out.verdict).dump()));
    CHECK(stored == out.verdict);
    if (stored.logits()) logged.emplace(stored.frame_index(), *stored.logits());
    first.push_back(stored);
  }
  ReplayProvider replay(logged);
  FrameProcessor again(c, replay);
  for (int i = 0; i < s.frame_count(); ++i)
    CHECK(again.process(std::make_shared<const Frame>(s.render(i))).verdict == first[i]);
  CHECK(again.video_score() == live.video_score());
}
