#pragma once

#include <optional>

#include "monogrove/grove.hpp"
#include "monogrove/types.hpp"

namespace monogrove {

struct MetricSet {
  double classification_error = 0.0;
  double auc = 0.0;
  double logloss = 0.0;
  std::optional<double> mse;
};

/// Fraction of prob >= threshold disagreeing with the 0/1 label.
/// Ties at the threshold classify as positive.
double classification_error(ConstRefVec& probs, ConstRefVec& labels, double threshold = 0.5);

/// Probability that a random positive outranks a random negative, ties at
/// 1/2 (Mann-Whitney). O(n log n) midranks; exactly equal to pair counting.
/// Throws Error when only one class is present.
double auc(ConstRefVec& scores, ConstRefVec& labels);

/// Mean Bernoulli negative log-likelihood from logit-scale scores.
double log_loss(ConstRefVec& scores, ConstRefVec& labels);

double mean_squared_error(ConstRefVec& predictions, ConstRefVec& targets);

MetricSet evaluate_model(const GroveModel& m, ConstRefMat& X, ConstRefVec& y);

}  // namespace monogrove
