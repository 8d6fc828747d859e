#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <utility>

#include "hector/domain.hpp"

namespace hector {

class CalibrationModel {
 public:
  explicit CalibrationModel(double temperature = 1.0);
  double temperature() const { return temperature_; }

 private:
  double temperature_;
};

struct GateDecision {
  bool in_distribution;
  double max_logit;
  std::optional<MesScore> mes;
  std::optional<ProbVector> probs;
  std::optional<double> certainty;
};

class EmptyValidationSet : public std::invalid_argument {
 public:
  EmptyValidationSet() : std::invalid_argument("validation set is empty") {}
};

using LabeledLogits = std::pair<LogitVector, MesScore>;

LogitVector apply_temperature(const LogitVector& logits, const CalibrationModel& calib);

/// Max-subtracted softmax; exact for any finite input.
ProbVector softmax(const LogitVector& logits);

/// Open-set gate on the raw (uncalibrated) maximum logit; a frame is
/// in-distribution when max logit >= osr_tau. Classification of
/// in-distribution frames uses the temperature-scaled softmax.
GateDecision gate_and_classify(const LogitVector& logits, const CalibrationModel& calib,
                               double osr_tau);

/// Mean negative log-likelihood of softmax(logits / temperature).
double mean_nll(std::span<const LabeledLogits> validation, double temperature);

/// Golden-section search over log T in [log 0.05, log 20].
CalibrationModel fit_temperature(std::span<const LabeledLogits> validation);

}  // namespace hector
