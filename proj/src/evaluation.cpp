#include "hector/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace hector {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (const auto& row : counts)
    for (auto c : row) t += c;
  return t;
}

double accuracy(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total == 0) throw EmptyMatrix();
  std::uint64_t trace = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) trace += cm.counts[c][c];
  return static_cast<double>(trace) / static_cast<double>(total);
}

double cohen_kappa(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total == 0) throw EmptyMatrix();
  // (p_o - p_e) / (1 - p_e) scaled by n^2 and kept in integers, so the only
  // rounding is the final division.
  using Wide = __int128;
  Wide chance = 0;
  Wide trace = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    Wide row = 0;
    Wide col = 0;
    for (std::size_t j = 0; j < kNumClasses; ++j) {
      row += cm.counts[c][j];
      col += cm.counts[j][c];
    }
    chance += row * col;
    trace += cm.counts[c][c];
  }
  const Wide n = total;
  const Wide denominator = n * n - chance;
  if (denominator == 0) return 1.0;  // single populated cell
  return static_cast<double>(static_cast<long double>(n * trace - chance) /
                             static_cast<long double>(denominator));
}

namespace {

void check_inputs(std::span<const double> scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("scores and labels differ in length");
  const auto pos = std::count(labels.begin(), labels.end(), true);
  if (pos == 0 || pos == static_cast<std::ptrdiff_t>(labels.size())) {
    throw SingleClassInput("AUROC needs both usable and non-usable frames");
  }
}

}  // namespace

double auroc(std::span<const double> scores, const std::vector<bool>& labels) {
  check_inputs(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });

  // Mid-ranks for tied groups.
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]]) {
        positive_rank_sum += mid_rank;
        ++positives;
      }
    }
    i = j;
  }
  const double p = static_cast<double>(positives);
  const double q = static_cast<double>(n - positives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

MacroAuroc macro_auroc(std::span<const VideoScores> videos) {
  if (videos.empty()) throw std::invalid_argument("no videos to evaluate");
  MacroAuroc out{0.0, {}};
  for (const auto& v : videos) {
    double a = 0.0;
    try {
      a = auroc(v.scores, v.labels);
    } catch (const SingleClassInput&) {
      throw SingleClassInput("video '" + v.video_id + "' has only one frame class");
    }
    out.per_video.emplace_back(v.video_id, a);
  }
  // Id order, so the result does not depend on video order.
  std::sort(out.per_video.begin(), out.per_video.end());
  double sum = 0.0;
  for (const auto& [id, a] : out.per_video) sum += a;
  out.macro = sum / static_cast<double>(out.per_video.size());
  return out;
}

std::vector<RocPoint> roc_sweep(std::span<const double> scores, const std::vector<bool>& labels) {
  check_inputs(scores, labels);
  std::vector<std::pair<double, bool>> items;
  for (std::size_t i = 0; i < scores.size(); ++i) items.emplace_back(scores[i], labels[i]);
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  const double pos = static_cast<double>(std::count(labels.begin(), labels.end(), true));
  const double neg = static_cast<double>(labels.size()) - pos;

  // Walk from the highest score down; each distinct value admits its group.
  std::vector<RocPoint> curve{{std::numeric_limits<double>::infinity(), 0.0, 0.0}};
  double tp = 0.0;
  double fp = 0.0;
  for (std::size_t i = 0; i < items.size();) {
    std::size_t j = i;
    while (j < items.size() && items[j].first == items[i].first) {
      (items[j].second ? tp : fp) += 1.0;
      ++j;
    }
    curve.push_back({items[i].first, tp / pos, fp / neg});
    i = j;
  }
  std::reverse(curve.begin(), curve.end());
  return curve;
}

double roc_area(std::span<const RocPoint> curve) {
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    area += (curve[i].fpr - curve[i + 1].fpr) * (curve[i].tpr + curve[i + 1].tpr) / 2.0;
  }
  return area;
}

std::string roc_csv(std::span<const RocPoint> curve) {
  std::ostringstream os;
  os.precision(17);
  os << "tau,tpr,fpr\n";
  for (const auto& p : curve) os << p.tau << ',' << p.tpr << ',' << p.fpr << '\n';
  return os.str();
}

std::string auroc_csv(const MacroAuroc& result) {
  std::ostringstream os;
  os.precision(17);
  os << "video_id,auroc\n";
  for (const auto& [id, a] : result.per_video) os << id << ',' << a << '\n';
  return os.str();
}

}  // namespace hector
