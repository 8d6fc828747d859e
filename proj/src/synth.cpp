#include "hector/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace hector {

namespace {

// Pixel levels are chosen so that base +/- (class amplitude + jitter +
// texture) never clips; clipping would shift block means away from plan.
constexpr double kRedBase[3] = {150.0, 80.0, 75.0};
constexpr double kBlueBase[3] = {70.0, 80.0, 170.0};
constexpr double kClassAmplitude = 30.0;
constexpr double kJitter = 20.0;
constexpr int kTexture = 25;

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t frame_seed(std::uint64_t seed, int index) {
  return seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(index) * 0xBF58476D1CE4E5B9ULL + 1;
}

std::string kind_token(SegmentKind k) {
  switch (k) {
    case SegmentKind::Usable: return "u";
    case SegmentKind::Blur: return "blur";
    case SegmentKind::Blue: return "blue";
    case SegmentKind::Black: return "black";
    case SegmentKind::OutOfBody: return "ood";
  }
  return "?";
}

Segment parse_segment(const std::string& token) {
  auto colon = token.find(':');
  if (colon == std::string::npos) throw DomainError("plan segment '" + token + "' needs ':<length>'");
  const std::string head = token.substr(0, colon);
  Segment seg{SegmentKind::Usable, 0, 0};
  try {
    seg.length = std::stoi(token.substr(colon + 1));
  } catch (const std::logic_error&) {
    throw DomainError("bad segment length in '" + token + "'");
  }
  if (seg.length < 1) throw DomainError("segment length must be >= 1");
  if (head.size() == 2 && head[0] == 'u' && head[1] >= '0' && head[1] <= '3') {
    seg.mes = head[1] - '0';
  } else if (head == "blur") {
    seg.kind = SegmentKind::Blur;
  } else if (head == "blue") {
    seg.kind = SegmentKind::Blue;
  } else if (head == "black") {
    seg.kind = SegmentKind::Black;
  } else if (head == "ood") {
    seg.kind = SegmentKind::OutOfBody;
  } else {
    throw DomainError("unknown plan segment '" + head + "'");
  }
  return seg;
}

}  // namespace

int SynthSpec::frame_count() const {
  int n = 0;
  for (const auto& s : plan) n += s.length;
  return n;
}

SynthSpec parse_synth_spec(const std::string& text) {
  SynthSpec spec;
  bool model_given = false;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw DomainError("synth spec item '" + item + "' needs key=value");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    try {
      if (key == "seed") {
        spec.seed = std::stoull(value);
      } else if (key == "size") {
        auto x = value.find('x');
        if (x == std::string::npos) throw DomainError("size must be WxH");
        spec.width = std::stoi(value.substr(0, x));
        spec.height = std::stoi(value.substr(x + 1));
      } else if (key == "noise") {
        spec.noise = std::stod(value);
      } else if (key == "model") {
        spec.model_seed = std::stoull(value);
        model_given = true;
      } else if (key == "side") {
        spec.input_side = std::stoi(value);
      } else if (key == "fps") {
        spec.fps = std::stod(value);
      } else if (key == "plan") {
        std::istringstream ps(value);
        std::string tok;
        while (std::getline(ps, tok, '+')) spec.plan.push_back(parse_segment(tok));
      } else {
        throw DomainError("unknown synth spec key '" + key + "'");
      }
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const DomainError*>(&e)) throw;
      throw DomainError("bad value for synth key '" + key + "': " + value);
    }
  }
  if (!model_given) spec.model_seed = spec.seed;
  if (spec.plan.empty()) spec.plan = random_plan(spec.seed, 4, 60);
  return spec;
}

std::string format_synth_spec(const SynthSpec& s) {
  std::ostringstream os;
  os.precision(17);
  os << "seed=" << s.seed << ",size=" << s.width << 'x' << s.height << ",noise=" << s.noise
     << ",model=" << s.model_seed << ",side=" << s.input_side << ",fps=" << s.fps << ",plan=";
  for (std::size_t i = 0; i < s.plan.size(); ++i) {
    if (i) os << '+';
    os << kind_token(s.plan[i].kind);
    if (s.plan[i].kind == SegmentKind::Usable) os << s.plan[i].mes;
    os << ':' << s.plan[i].length;
  }
  return os.str();
}

std::vector<Segment> random_plan(std::uint64_t seed, int usable_segments, int segment_length) {
  std::mt19937_64 rng(seed ^ 0xA5A5A5A5ULL);
  constexpr SegmentKind noisy[] = {SegmentKind::Blur, SegmentKind::Blue, SegmentKind::Black,
                                   SegmentKind::OutOfBody};
  std::vector<Segment> plan;
  for (int i = 0; i < usable_segments; ++i) {
    const int gap = std::max(1, segment_length / 3);
    plan.push_back({noisy[rng() % 4], gap, 0});
    plan.push_back({SegmentKind::Usable, segment_length, static_cast<int>(rng() % 4)});
  }
  plan.push_back({noisy[rng() % 4], std::max(1, segment_length / 3), 0});
  return plan;
}

SynthStream::SynthStream(SynthSpec spec)
    : spec_(std::move(spec)), model_(StubModelSpec::from_seed(spec_.model_seed, spec_.input_side)) {
  if (spec_.width < 1 || spec_.height < 1) throw DomainError("synthetic frame size must be >= 1");
  if (!(spec_.noise >= 0.0 && spec_.noise <= 1.0)) throw DomainError("noise must be in [0,1]");
  if (spec_.plan.empty()) throw DomainError("synthetic plan is empty");

  const std::size_t dim = model_.input_dim();
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::vector<double> dir(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      double others = 0.0;
      for (std::size_t j = 0; j < kNumClasses; ++j)
        if (j != c) others += model_.weight(j, d);
      dir[d] = model_.weight(c, d) - others / 3.0 >= 0.0 ? 1.0 : -1.0;
    }
    class_directions_.push_back(std::move(dir));
  }

  auto planned_logits = [&](const std::vector<double>& levels) {
    std::array<double, kNumClasses> z{};
    for (std::size_t c = 0; c < kNumClasses; ++c)
      for (std::size_t d = 0; d < dim; ++d) z[c] += model_.weight(c, d) * (levels[d] / 255.0);
    return z;
  };
  auto max_of = [](const std::array<double, kNumClasses>& z) {
    return *std::max_element(z.begin(), z.end());
  };

  // Noise-free templates define the separation and the suggested gate.
  double usable_floor = INFINITY;
  for (int c = 0; c < static_cast<int>(kNumClasses); ++c) {
    auto z = planned_logits(block_targets({SegmentKind::Usable, c, kClassAmplitude, 0}));
    if (argmax_high_tie(z) != c) {
      throw DomainError("stub model seed " + std::to_string(spec_.model_seed) +
                        " cannot separate class " + std::to_string(c));
    }
    usable_floor = std::min(usable_floor, max_of(z));
  }
  double noisy_ceiling = -INFINITY;
  for (auto kind : {SegmentKind::Blur, SegmentKind::Blue, SegmentKind::Black,
                    SegmentKind::OutOfBody}) {
    noisy_ceiling = std::max(noisy_ceiling, max_of(planned_logits(block_targets({kind, 0, 0.0, 0}))));
  }
  suggested_tau_ = 0.5 * (usable_floor + noisy_ceiling);

  int index = 0;
  for (const auto& seg : spec_.plan) {
    if (seg.length < 1) throw DomainError("segment length must be >= 1");
    for (int i = 0; i < seg.length; ++i, ++index) {
      std::mt19937_64 rng(frame_seed(spec_.seed, index));
      FramePlan fp{seg.kind, seg.mes, 0.0, rng()};
      if (seg.kind == SegmentKind::Usable) {
        fp.amplitude = kClassAmplitude * (1.0 - 0.8 * spec_.noise * unit_uniform(rng));
      } else if (seg.kind == SegmentKind::OutOfBody) {
        fp.mes = static_cast<int>(rng() % kNumClasses);
        fp.amplitude = kClassAmplitude * spec_.noise * unit_uniform(rng);
      }
      frames_.push_back(fp);
      usable_.push_back(seg.kind == SegmentKind::Usable);
      true_mes_.push_back(seg.kind == SegmentKind::Usable ? std::optional<int>(seg.mes)
                                                          : std::nullopt);
      planned_scores_.push_back(max_of(planned_logits(block_targets(fp))));
    }
  }
}

std::vector<double> SynthStream::block_targets(const FramePlan& plan) const {
  const int side = spec_.input_side;
  const std::size_t dim = model_.input_dim();
  std::vector<double> levels(dim, 0.0);
  if (plan.kind == SegmentKind::Black) return levels;

  std::mt19937_64 rng(plan.rng_seed);
  const double* base = plan.kind == SegmentKind::Blue ? kBlueBase : kRedBase;
  const double jitter = plan.kind == SegmentKind::Usable ? kJitter * spec_.noise : 0.0;
  for (int by = 0; by < side; ++by) {
    for (int bx = 0; bx < side; ++bx) {
      for (int ch = 0; ch < 3; ++ch) {
        const std::size_t d = (static_cast<std::size_t>(by) * side + bx) * 3 + ch;
        double v = base[ch];
        switch (plan.kind) {
          case SegmentKind::Usable:
          case SegmentKind::OutOfBody:
            v += plan.amplitude * class_directions_[plan.mes][d];
            if (jitter > 0.0) v += jitter * (2.0 * unit_uniform(rng) - 1.0);
            break;
          case SegmentKind::Blur:
            v += 20.0 * (static_cast<double>(bx) / std::max(1, side - 1) - 0.5);
            break;
          default:
            break;
        }
        levels[d] = std::clamp(std::round(v), 0.0, 255.0);
      }
    }
  }
  return levels;
}

Frame SynthStream::render(int index) const {
  if (index < 0 || index >= frame_count()) throw DomainError("synthetic frame index out of range");
  const FramePlan& plan = frames_[index];
  const auto levels = block_targets(plan);
  const int w = spec_.width;
  const int h = spec_.height;
  const int side = spec_.input_side;
  const bool textured = plan.kind != SegmentKind::Blur && plan.kind != SegmentKind::Black;

  std::vector<int> col_block(w);
  for (int x = 0; x < w; ++x) col_block[x] = std::min(side - 1, static_cast<int>(static_cast<std::int64_t>(x) * side / w));

  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3);
  std::size_t o = 0;
  for (int y = 0; y < h; ++y) {
    const int by = std::min(side - 1, static_cast<int>(static_cast<std::int64_t>(y) * side / h));
    const double* row = &levels[static_cast<std::size_t>(by) * side * 3];
    for (int x = 0; x < w; ++x) {
      const double* cell = row + col_block[x] * 3;
      const int t = textured ? (((x + y) & 1) ? kTexture : -kTexture) : 0;
      for (int ch = 0; ch < 3; ++ch) {
        px[o++] = static_cast<std::uint8_t>(std::clamp(static_cast<int>(cell[ch]) + t, 0, 255));
      }
    }
  }
  const double fps = spec_.fps > 0.0 ? spec_.fps : 25.0;
  return Frame(static_cast<std::uint64_t>(index),
               static_cast<std::int64_t>(std::llround(index * 1000.0 / fps)), w, h, std::move(px));
}

std::optional<int> SynthStream::planted_max_class() const {
  std::optional<int> best;
  for (const auto& m : true_mes_)
    if (m && (!best || *m > *best)) best = m;
  return best;
}

}  // namespace hector
