#pragma once

#include <string>
#include <vector>

#include "monogrove/grove.hpp"
#include "monogrove/lattice.hpp"
#include "monogrove/schema.hpp"
#include "monogrove/types.hpp"

namespace monogrove {

struct GridOptions {
  int points_1d = 64;     // singleton-group axes
  int points_group = 16;  // per dimension inside multi-feature groups
};

/// Equispaced evaluation lattices, one axis list per architecture group.
/// Count and binary axes are the integer points of the truncated domain.
struct PenaltyGrid {
  std::vector<std::vector<Vec>> group_axes;
};

PenaltyGrid build_penalty_grid(const FeatureSchema& schema, const GroveArchitecture& arch,
                               const GridOptions& opts = {});

struct ConstraintCheck {
  std::string kind;                       // "individual" | "weak" | "strong"
  std::vector<std::string> features;      // [alpha] or [dominant, dominated]
  double min_margin = 0.0;                // >= 0 means no grid violation
  Vec worst_point;                        // lattice point attaining min_margin
  std::vector<int> worst_point_features;  // schema indices of worst_point coords
};

/// Value plus gradient in the whole-model parameter layout of flatten().
struct PenaltyValue {
  double value = 0.0;
  Vec param_grad;
  std::vector<ConstraintCheck> constraints;
};

// Each h is the mean over its constraints of the mean over that constraint's
// lattice of (eps + max(0, s))^2, where s is the signed violation. The eps
// floor keeps the hinge gradient bounded away from zero at the boundary, so
// escalated penalty weights drive grid violations to exactly zero; evaluating
// at eps = 0 afterwards reports a plain squared hinge that vanishes iff the
// grid is violation-free.

/// Individual monotonicity: s = -df/dx_alpha on the feature's group lattice.
PenaltyValue h1(const GroveModel& m, const FeatureSchema& schema, const MonotoneSpec& spec,
                const PenaltyGrid& grid, double eps);

/// Weak pairwise: s = -df/dx_u + df/dx_v on the tied diagonal x_u = x_v,
/// either inside one group or across two singleton subnets.
PenaltyValue h2(const GroveModel& m, const FeatureSchema& schema, const MonotoneSpec& spec,
                const PenaltyGrid& grid, double eps);

/// Strong pairwise over the transitive closure: s = df/dx_z - df/dx_y on the
/// full group lattice; binary singleton pairs fall back to the {0,1} diagonal.
PenaltyValue h3(const GroveModel& m, const FeatureSchema& schema, const MonotoneSpec& spec,
                const PenaltyGrid& grid, double eps);

struct PenaltyReport {
  double h1 = 0.0, h2 = 0.0, h3 = 0.0;
  double epsilon_used = 0.0;
  std::vector<ConstraintCheck> constraints;  // h1's, then h2's, then h3's

  bool clean() const { return h1 == 0.0 && h2 == 0.0 && h3 == 0.0; }
};

PenaltyReport penalty_report(const GroveModel& m, const FeatureSchema& schema,
                             const MonotoneSpec& spec, const PenaltyGrid& grid, double eps);

}  // namespace monogrove
