#pragma once

#include "json.hpp"

#include "hector/domain.hpp"
#include "hector/session_store.hpp"
#include "hector/temporal.hpp"

namespace hector::codec {

using nlohmann::json;

json config_to_json(const PipelineConfig& c);
PipelineConfig config_from_json(const json& j);

json verdict_to_json(const FrameVerdict& v);
FrameVerdict verdict_from_json(const json& j);

json smoothed_to_json(const SmoothedPoint& p);
SmoothedPoint smoothed_from_json(const json& j);

json video_score_to_json(const VideoScore& s);
VideoScore video_score_from_json(const json& j);

json selected_to_json(const SelectedFrame& s);
SelectedFrame selected_from_json(const json& j);

json edit_to_json(const ReviewEdit& e);
ReviewEdit edit_from_json(const json& j);

}  // namespace hector::codec
