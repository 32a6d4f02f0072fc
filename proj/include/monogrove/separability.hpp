#pragma once

#include <vector>

#include "monogrove/certifier.hpp"
#include "monogrove/grove.hpp"
#include "monogrove/schema.hpp"
#include "monogrove/trainer.hpp"
#include "monogrove/types.hpp"

namespace monogrove {

struct SeparabilityConfig {
  double threshold_eps = 0.005;  // accuracy-gap tolerance
  std::vector<int> hidden = {2};
  TrainConfig train;
  CertifyOptions cert;
};

struct SeparabilityVerdict {
  double acc_joint = 0.0;
  double acc_separated = 0.0;
  double threshold_eps = 0.0;
  bool separable = false;
  bool monotone_feasible = false;
};

std::string verdict_to_json(const SeparabilityVerdict& v);

/// Trains a joint model (one group over U union V) and a separated model
/// (group U plus group V), each under every constraint its architecture can
/// carry, and compares accuracy. "Acc" is classification accuracy for
/// classification tasks and negative MSE for regression. monotone_feasible
/// requires both fits to certify against the full constraint set and the
/// separated form to raise no structural hazard; separable additionally
/// requires the accuracy gap to stay below threshold_eps.
SeparabilityVerdict test_separability(ConstRefMat& X, ConstRefVec& y, Task task,
                                      const FeatureSchema& schema, const MonotoneSpec& spec,
                                      const std::vector<int>& group_u,
                                      const std::vector<int>& group_v,
                                      const SeparabilityConfig& config);

}  // namespace monogrove
