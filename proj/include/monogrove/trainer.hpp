#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "monogrove/grove.hpp"
#include "monogrove/penalty.hpp"
#include "monogrove/schema.hpp"
#include "monogrove/types.hpp"

namespace monogrove {

enum class OptimizerKind { Sgd, Momentum, Adam };

OptimizerKind optimizer_from_name(const std::string& name);

struct TrainConfig {
  double learning_rate = 1e-2;
  int epochs_per_round = 500;
  int batch_size = 0;  // 0 = full batch
  std::uint64_t seed = 0;
  double lambda_init = 1.0;
  double lambda_factor = 10.0;
  int max_rounds = 8;
  double epsilon = 1e-3;  // hinge floor during training; stopping checks use eps = 0
  OptimizerKind optimizer = OptimizerKind::Adam;
  bool warm_start = true;
  double positive_weight = 1.0;  // class weight for the positive label
  double init_scale = 1.0;
  GridOptions grid;

  void check() const;
};

struct RoundRecord {
  int round = 0;
  double lambda1 = 0, lambda2 = 0, lambda3 = 0;
  double loss = 0;
  double h1 = 0, h2 = 0, h3 = 0;  // evaluated at eps = 0
  double metric = 0;              // mse (regression) or classification error
  double auc = 0;                 // 0 for regression
};

struct TrainTrace {
  std::vector<RoundRecord> rounds;
};

std::string trace_to_csv(const TrainTrace& trace);

/// Data-fit term of the objective: mean squared error for regression, mean
/// Bernoulli negative log-likelihood of logistic(score) for classification.
/// Gradient in flatten() layout.
std::pair<double, Vec> loss(const GroveModel& m, ConstRefMat& X, ConstRefVec& y,
                            double positive_weight = 1.0);

/// One block of epochs on  loss + lambda . (h1, h2, h3)  at the config's
/// training epsilon. Deterministic given the seed; `round_index` decorrelates
/// batch shuffling between rounds. Throws TrainError on divergence.
GroveModel train_round(const GroveModel& model, ConstRefMat& X, ConstRefVec& y,
                       const FeatureSchema& schema, const MonotoneSpec& spec,
                       const PenaltyGrid& grid, const Eigen::Vector3d& lambdas,
                       const TrainConfig& config, int round_index = 0);

struct FitResult {
  GroveModel model;
  TrainTrace trace;
  bool certified = false;  // every penalty vanished at eps = 0 on the training grid
  Eigen::Vector3d final_lambdas = Eigen::Vector3d::Zero();
};

/// Penalty-escalation loop: start with all lambdas at zero, train a round,
/// evaluate h1/h2/h3 at eps = 0 on the training grid, raise the lambda of any
/// nonzero penalty (max(lambda_init, lambda * lambda_factor)), and retrain
/// warm-started until every penalty vanishes or max_rounds is exhausted.
/// The returned model has contributions centered at the domain minimum.
FitResult fit(ConstRefMat& X, ConstRefVec& y, const FeatureSchema& schema,
              const MonotoneSpec& spec, const GroveArchitecture& arch, Task task,
              const TrainConfig& config);

}  // namespace monogrove
