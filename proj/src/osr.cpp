#include "hector/osr.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace hector {

CalibrationModel::CalibrationModel(double temperature) : temperature_(temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw DomainError("temperature must be finite and > 0");
  }
}

LogitVector apply_temperature(const LogitVector& logits, const CalibrationModel& calib) {
  std::array<double, kNumClasses> out{};
  for (std::size_t c = 0; c < kNumClasses; ++c) out[c] = logits[c] / calib.temperature();
  return LogitVector(out);
}

ProbVector softmax(const LogitVector& logits) {
  const double m = logits.max();
  std::array<double, kNumClasses> e{};
  double sum = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    e[c] = std::exp(logits[c] - m);
    sum += e[c];
  }
  for (double& v : e) v /= sum;
  return ProbVector(e);
}

GateDecision gate_and_classify(const LogitVector& logits, const CalibrationModel& calib,
                               double osr_tau) {
  GateDecision d{false, logits.max(), std::nullopt, std::nullopt, std::nullopt};
  if (d.max_logit < osr_tau) return d;
  d.in_distribution = true;
  ProbVector probs = softmax(apply_temperature(logits, calib));
  d.mes = MesScore(argmax_high_tie(probs.values()));
  d.certainty = probs.max();
  d.probs = probs;
  return d;
}

namespace {

double sample_nll(const LogitVector& z, int label, double temperature) {
  const double m = z.max() / temperature;
  double sum = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) sum += std::exp(z[c] / temperature - m);
  return m + std::log(sum) - z[label] / temperature;
}

}  // namespace

double mean_nll(std::span<const LabeledLogits> validation, double temperature) {
  if (validation.empty()) throw EmptyValidationSet();
  double total = 0.0;
  for (const auto& [z, y] : validation) total += sample_nll(z, y.value(), temperature);
  return total / static_cast<double>(validation.size());
}

CalibrationModel fit_temperature(std::span<const LabeledLogits> validation) {
  if (validation.empty()) throw EmptyValidationSet();

  // Canonical order so the floating-point sum does not depend on input order.
  std::vector<LabeledLogits> sorted(validation.begin(), validation.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.first.values() != b.first.values()) return a.first.values() < b.first.values();
    return a.second < b.second;
  });
  auto objective = [&](double log_t) { return mean_nll(sorted, std::exp(log_t)); };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::log(0.05);
  double hi = std::log(20.0);
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = objective(x1);
  double f2 = objective(x2);
  while (hi - lo > 1e-4) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = objective(x2);
    }
  }
  const double best = 0.5 * (lo + hi);
  if (objective(best) > objective(0.0)) return CalibrationModel(1.0);
  return CalibrationModel(std::exp(best));
}

}  // namespace hector
