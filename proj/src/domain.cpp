#include "hector/domain.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hector {

Frame::Frame(std::uint64_t index, std::int64_t timestamp_ms, int width,
             int height, std::vector<std::uint8_t> pixels)
    : index_(index),
      timestamp_ms_(timestamp_ms),
      width_(width),
      height_(height),
      pixels_(std::move(pixels)) {
  if (width < 1 || height < 1) throw DomainError("frame dimensions must be >= 1");
  if (pixels_.size() != static_cast<std::size_t>(width) * height * 3) {
    throw DomainError("frame pixel buffer must hold width*height*3 bytes");
  }
}

LogitVector::LogitVector(std::array<double, kNumClasses> values)
    : values_(values) {
  for (double v : values_) {
    if (!std::isfinite(v)) throw DomainError("logits must be finite");
  }
}

double LogitVector::max() const {
  return *std::max_element(values_.begin(), values_.end());
}

ProbVector::ProbVector(std::array<double, kNumClasses> values)
    : values_(values) {
  double sum = 0.0;
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("probability outside [0,1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw DomainError("probabilities must sum to 1");
  }
}

double ProbVector::max() const {
  return *std::max_element(values_.begin(), values_.end());
}

MesScore::MesScore(int value) : value_(value) {
  if (value < 0 || value > 3) throw DomainError("MES must be in {0,1,2,3}");
}

int argmax_high_tie(const std::array<double, kNumClasses>& values) {
  int best = 0;
  for (int c = 1; c < static_cast<int>(kNumClasses); ++c) {
    if (values[c] >= values[best]) best = c;
  }
  return best;
}

std::string to_string(DiscardReason reason) {
  switch (reason) {
    case DiscardReason::Blur: return "blur";
    case DiscardReason::ColourRatio: return "colour_ratio";
    case DiscardReason::BelowOsrThreshold: return "below_osr_threshold";
    case DiscardReason::InferenceUnavailable: return "inference_unavailable";
    case DiscardReason::Dropped: return "dropped";
  }
  return "unknown";
}

DiscardReason discard_reason_from_string(const std::string& name) {
  for (auto r : {DiscardReason::Blur, DiscardReason::ColourRatio,
                 DiscardReason::BelowOsrThreshold,
                 DiscardReason::InferenceUnavailable, DiscardReason::Dropped}) {
    if (to_string(r) == name) return r;
  }
  throw DomainError("unknown discard reason: " + name);
}

FrameVerdict::FrameVerdict(std::uint64_t frame_index, std::int64_t timestamp_ms,
                           Status status, std::optional<LogitVector> logits)
    : frame_index_(frame_index),
      timestamp_ms_(timestamp_ms),
      status_(std::move(status)),
      logits_(std::move(logits)) {
  if (const auto* s = std::get_if<Scored>(&status_)) {
    if (s->certainty != s->probs.max()) {
      throw DomainError("scored verdict certainty must equal max(probs)");
    }
  }
}

std::vector<std::string> validate_config(const PipelineConfig& c) {
  std::vector<std::string> v;
  if (!(c.temperature > 0.0) || !std::isfinite(c.temperature)) {
    v.emplace_back("temperature must be > 0");
  }
  if (c.window < 1) v.emplace_back("window must be >= 1");
  if (c.k < 1) v.emplace_back("k must be >= 1");
  if (c.min_gap < 0) v.emplace_back("min_gap must be >= 0");
  if (!(c.blur_var_min >= 0.0)) v.emplace_back("blur_var_min must be >= 0");
  if (!(c.red_ratio_min >= 0.0 && c.red_ratio_min <= c.red_ratio_max &&
        c.red_ratio_max <= 1.0)) {
    v.emplace_back("red ratio bounds must satisfy 0 <= min <= max <= 1");
  }
  if (!std::isfinite(c.osr_tau)) v.emplace_back("osr_tau must be finite");
  return v;
}

namespace {

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string trim(std::string_view s) {
  const auto ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T out{};
  auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw DomainError("bad value for " + key + ": '" + text + "'");
  }
  return out;
}

}  // namespace

std::string serialize_config(const PipelineConfig& c) {
  std::ostringstream os;
  os << "blur_var_min = " << format_double(c.blur_var_min) << '\n'
     << "red_ratio_min = " << format_double(c.red_ratio_min) << '\n'
     << "red_ratio_max = " << format_double(c.red_ratio_max) << '\n'
     << "osr_tau = " << format_double(c.osr_tau) << '\n'
     << "temperature = " << format_double(c.temperature) << '\n'
     << "window = " << c.window << '\n'
     << "k = " << c.k << '\n'
     << "min_gap = " << c.min_gap << '\n';
  return os.str();
}

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::string body = trim(line);
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw DomainError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key == "blur_var_min") c.blur_var_min = parse_number<double>(key, value);
    else if (key == "red_ratio_min") c.red_ratio_min = parse_number<double>(key, value);
    else if (key == "red_ratio_max") c.red_ratio_max = parse_number<double>(key, value);
    else if (key == "osr_tau") c.osr_tau = parse_number<double>(key, value);
    else if (key == "temperature") c.temperature = parse_number<double>(key, value);
    else if (key == "window") c.window = parse_number<int>(key, value);
    else if (key == "k") c.k = parse_number<int>(key, value);
    else if (key == "min_gap") c.min_gap = parse_number<int>(key, value);
    else throw DomainError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  return c;
}

PipelineConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace hector
