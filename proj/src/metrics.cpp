#include "monogrove/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace monogrove {

double classification_error(ConstRefVec& probs, ConstRefVec& labels, double threshold) {
  if (probs.size() == 0) throw Error("classification_error: empty input");
  if (probs.size() != labels.size()) throw Error("classification_error: length mismatch");
  Eigen::Index wrong = 0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    double pred = probs(i) >= threshold ? 1.0 : 0.0;
    if (pred != labels(i)) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(probs.size());
}

double auc(ConstRefVec& scores, ConstRefVec& labels) {
  const Eigen::Index n = scores.size();
  if (n == 0 || labels.size() != n) throw Error("auc: bad input sizes");
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return scores(a) < scores(b); });

  // Midranks: tied scores share the average of their 1-based rank range.
  std::vector<double> rank(n);
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && scores(order[j + 1]) == scores(order[i])) ++j;
    double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index k = i; k <= j; ++k) rank[order[k]] = mid;
    i = j + 1;
  }

  double n_pos = 0, rank_sum = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (labels(k) > 0.5) {
      n_pos += 1;
      rank_sum += rank[k];
    }
  }
  double n_neg = static_cast<double>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0) throw Error("auc: undefined, only one class present");
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

double log_loss(ConstRefVec& scores, ConstRefVec& labels) {
  if (scores.size() == 0 || scores.size() != labels.size()) throw Error("log_loss: bad input");
  double total = 0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    double s = scores(i);
    // log(1 + e^s) - y*s, computed without overflow
    double softplus = std::max(s, 0.0) + std::log1p(std::exp(-std::abs(s)));
    total += softplus - labels(i) * s;
  }
  return total / static_cast<double>(scores.size());
}

double mean_squared_error(ConstRefVec& predictions, ConstRefVec& targets) {
  if (predictions.size() == 0 || predictions.size() != targets.size())
    throw Error("mean_squared_error: bad input");
  return (predictions - targets).squaredNorm() / static_cast<double>(predictions.size());
}

MetricSet evaluate_model(const GroveModel& m, ConstRefMat& X, ConstRefVec& y) {
  MetricSet out;
  Vec scores = predict_scores(m, X);
  if (m.task == Task::Regression) {
    out.mse = mean_squared_error(scores, y);
    out.classification_error = 0.0;
    out.auc = 0.0;
    out.logloss = 0.0;
    return out;
  }
  Vec probs = scores.unaryExpr([](double s) { return 1.0 / (1.0 + std::exp(-s)); });
  out.classification_error = classification_error(probs, y);
  out.auc = auc(scores, y);
  out.logloss = log_loss(scores, y);
  return out;
}

}  // namespace monogrove
