#pragma once

#include <optional>
#include <string>
#include <vector>

#include "monogrove/schema.hpp"
#include "monogrove/subnet.hpp"
#include "monogrove/types.hpp"

namespace monogrove {

enum class Task { Regression, BinaryClassification };

const char* task_name(Task t);
Task task_from_name(const std::string& name);

/// Additive model: intercept plus one subnet per architecture group. Scores
/// live on the logit scale for classification.
struct GroveModel {
  double intercept = 0.0;
  std::vector<SubnetParams> subnets;  // aligned with arch.groups
  GroveArchitecture arch;
  Task task = Task::Regression;
  Vec centering;  // shift applied to each subnet when contributions were anchored

  int num_groups() const { return static_cast<int>(arch.groups.size()); }
  void check() const;  // one subnet per group, input dims match group sizes
};

struct Prediction {
  double score = 0.0;
  std::optional<double> probability;
};

/// Zero-parameter model over the architecture.
GroveModel make_grove(const GroveArchitecture& arch, Task task);

/// Seeded random init; consumes the rng in group order.
GroveModel random_grove(const GroveArchitecture& arch, Task task, Rng& rng, double scale = 1.0);

Vec group_slice(ConstRefVec& x, const Group& g);
Mat group_slice_cols(ConstRefMat& X, const Group& g);

Prediction predict(const GroveModel& m, ConstRefVec& x);
Vec predict_scores(const GroveModel& m, ConstRefMat& X);

double subnet_contribution(const GroveModel& m, int group, ConstRefVec& x_slice);

/// Full gradient of the score in x, assembled from per-subnet input
/// gradients; coordinates outside a feature's group contribute zero.
Vec input_partials(const GroveModel& m, ConstRefVec& x);

/// Shifts every subnet so its value at the group's domain minimum is zero,
/// absorbing the shifts into the intercept. Predictions are unchanged.
void center_contributions(GroveModel& m, const FeatureSchema& schema);

// Whole-model parameter vector: intercept first, then each group's subnet in
// flatten_params() order. Offsets index into that vector.
int num_params(const GroveModel& m);
Vec flatten(const GroveModel& m);
void set_params(GroveModel& m, ConstRefVec& theta);
int group_param_offset(const GroveModel& m, int group);

struct ScalerEntry {
  bool applied = false;
  double mean = 0.0;
  double sd = 1.0;
};

struct Scaler {
  std::vector<ScalerEntry> entries;  // one per schema feature
  std::vector<std::string> warnings;

  double transform_one(int feature, double v) const;
};

/// Model file payload. The schema travels with the model so certification and
/// exports are self-contained.
std::string model_to_json(const GroveModel& m, const FeatureSchema& schema,
                          const Scaler* scaler = nullptr);
struct LoadedModel {
  GroveModel model;
  FeatureSchema schema;
  std::optional<Scaler> scaler;
};
LoadedModel model_from_json(const std::string& text);
void save_model(const std::string& path, const GroveModel& m, const FeatureSchema& schema,
                const Scaler* scaler = nullptr);
LoadedModel load_model(const std::string& path);

}  // namespace monogrove
