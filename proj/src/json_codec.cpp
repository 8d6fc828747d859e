#include "hector/json_codec.hpp"

namespace hector::codec {

namespace {

json arr(const std::array<double, kNumClasses>& a) { return json(std::vector<double>(a.begin(), a.end())); }

std::array<double, kNumClasses> arr4(const json& j) {
  if (!j.is_array() || j.size() != kNumClasses) throw DomainError("expected an array of 4 numbers");
  std::array<double, kNumClasses> out{};
  for (std::size_t i = 0; i < kNumClasses; ++i) out[i] = j.at(i).get<double>();
  return out;
}

}  // namespace

json config_to_json(const PipelineConfig& c) {
  return json{{"blur_var_min", c.blur_var_min}, {"red_ratio_min", c.red_ratio_min},
              {"red_ratio_max", c.red_ratio_max}, {"osr_tau", c.osr_tau},
              {"temperature", c.temperature},   {"window", c.window},
              {"k", c.k},                       {"min_gap", c.min_gap}};
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& key = it.key();
    if (key == "blur_var_min") c.blur_var_min = it->get<double>();
    else if (key == "red_ratio_min") c.red_ratio_min = it->get<double>();
    else if (key == "red_ratio_max") c.red_ratio_max = it->get<double>();
    else if (key == "osr_tau") c.osr_tau = it->get<double>();
    else if (key == "temperature") c.temperature = it->get<double>();
    else if (key == "window") c.window = it->get<int>();
    else if (key == "k") c.k = it->get<int>();
    else if (key == "min_gap") c.min_gap = it->get<int>();
    else throw DomainError("unknown config key '" + key + "'");
  }
  return c;
}

json verdict_to_json(const FrameVerdict& v) {
  json j{{"frame", v.frame_index()}, {"ts", v.timestamp_ms()}};
  if (v.is_scored()) {
    const auto& s = v.scored();
    j["status"] = "scored";
    j["mes"] = s.mes.value();
    j["probs"] = arr(s.probs.values());
    j["max_logit"] = s.max_logit;
    j["certainty"] = s.certainty;
  } else {
    j["status"] = "discarded";
    j["reason"] = to_string(v.discarded().reason);
  }
  if (v.logits()) j["logits"] = arr(v.logits()->values());
  return j;
}

FrameVerdict verdict_from_json(const json& j) {
  std::optional<LogitVector> logits;
  if (j.contains("logits")) logits = LogitVector(arr4(j.at("logits")));
  const auto status = j.at("status").get<std::string>();
  FrameVerdict::Status st = Discarded{DiscardReason::Blur};
  if (status == "scored") {
    st = Scored{MesScore(j.at("mes").get<int>()), ProbVector(arr4(j.at("probs"))),
                j.at("max_logit").get<double>(), j.at("certainty").get<double>()};
  } else if (status == "discarded") {
    st = Discarded{discard_reason_from_string(j.at("reason").get<std::string>())};
  } else {
    throw DomainError("unknown verdict status '" + status + "'");
  }
  return FrameVerdict(j.at("frame").get<std::uint64_t>(), j.at("ts").get<std::int64_t>(), st,
                      logits);
}

json smoothed_to_json(const SmoothedPoint& p) {
  return json{{"frame", p.frame_index},
              {"fill", p.window_fill},
              {"mean_probs", arr(p.mean_probs.values())},
              {"mes", p.smoothed_mes.value()}};
}

SmoothedPoint smoothed_from_json(const json& j) {
  return SmoothedPoint{j.at("frame").get<std::uint64_t>(), j.at("fill").get<int>(),
                       ProbVector(arr4(j.at("mean_probs"))), MesScore(j.at("mes").get<int>())};
}

json video_score_to_json(const VideoScore& s) {
  return json{{"overall_mes", s.overall_mes.value()},
              {"peak_frame", s.peak_frame_index},
              {"peak_probs", arr(s.peak_probs.values())}};
}

VideoScore video_score_from_json(const json& j) {
  return VideoScore{MesScore(j.at("overall_mes").get<int>()),
                    j.at("peak_frame").get<std::uint64_t>(),
                    ProbVector(arr4(j.at("peak_probs")))};
}

json selected_to_json(const SelectedFrame& s) {
  return json{{"frame", s.frame_index},
              {"mes", s.mes.value()},
              {"certainty", s.certainty},
              {"probs", arr(s.probs.values())},
              {"image", s.image_file}};
}

SelectedFrame selected_from_json(const json& j) {
  return SelectedFrame{j.at("frame").get<std::uint64_t>(), MesScore(j.at("mes").get<int>()),
                       j.at("certainty").get<double>(), ProbVector(arr4(j.at("probs"))),
                       j.at("image").get<std::string>()};
}

json edit_to_json(const ReviewEdit& e) {
  return json{{"frame", e.frame_index},
              {"corrected_mes", e.corrected_mes.value()},
              {"journal", e.keep_in_journal},
              {"edited_at", e.edited_at}};
}

ReviewEdit edit_from_json(const json& j) {
  return ReviewEdit{j.at("frame").get<std::uint64_t>(), MesScore(j.at("corrected_mes").get<int>()),
                    j.value("journal", false), j.value("edited_at", std::string{})};
}

}  // namespace hector::codec
