#pragma once

#include <functional>
#include <string>
#include <vector>

#include "monogrove/grove.hpp"
#include "monogrove/lattice.hpp"
#include "monogrove/schema.hpp"
#include "monogrove/types.hpp"

namespace monogrove {

struct CertifyOptions {
  // Audit lattice densities; defaults are 4x the training grid, and count
  // axes are refined between integer points as well.
  int points_1d = 256;
  int points_group = 64;
  double dme_tail_threshold = 0.25;
  double slope_floor = 1e-3;
  int dme_points = 64;
  std::size_t max_lattice_points = std::size_t(1) << 22;
  std::size_t max_comparisons = 1000000;
};

struct ConstraintResult {
  std::string kind;  // "individual" | "weak" | "strong"
  std::vector<std::string> features;
  bool pass = true;
  double min_margin = 0.0;
  Vec witness_point;    // present iff fail
  Vec witness_point_b;  // value-based checks: the point that should dominate
  std::vector<std::string> point_features;
};

struct DmeFinding {
  std::string feature;
  bool is_dme = false;
  bool increasing = false;      // all first differences > 0
  bool diminishing = false;     // first differences strictly decreasing
  bool tail_vanishes = false;   // last difference < tail_threshold * first
  Vec grid;
  Vec first_differences;
};

struct StructuralHazard {
  std::string dominant, dominated;
  double min_slope = 0.0;
  std::string note;
};

struct CertificationReport {
  std::vector<ConstraintResult> constraints;
  std::vector<DmeFinding> dme;
  std::vector<StructuralHazard> structural;

  bool all_pass() const;
  const ConstraintResult* find(const std::string& kind,
                               const std::vector<std::string>& features) const;
};

std::string report_to_json(const CertificationReport& rep);
std::string report_summary(const CertificationReport& rep);

/// Derivative-based verification on audit lattices: individual margins
/// min df/dx_alpha, weak margins on tied diagonals, strong margins over full
/// group lattices with the pair list expanded by transitivity. Strong pairs
/// split across singleton subnets are checked in the additive form
/// min f_y' - max f_z'. Exact subnet derivatives, no finite differences.
CertificationReport certify(const GroveModel& m, const FeatureSchema& schema,
                            const MonotoneSpec& spec, const CertifyOptions& opts = {});

/// Value-level brute force over integer domains: every admissible base point
/// and increment c is compared directly against the definitions. This is the
/// oracle the derivative-based certify is tested against. All features
/// touched by a constraint must be count or binary.
CertificationReport certify_discrete(const GroveModel& m, const FeatureSchema& schema,
                                     const MonotoneSpec& spec,
                                     std::size_t max_comparisons = 1000000);

/// Same brute force for an arbitrary value function over the schema's
/// (finite) feature domains; used to audit tabulated models directly.
using ValueFn = std::function<double(const Vec&)>;
CertificationReport certify_discrete_fn(const ValueFn& f, const FeatureSchema& schema,
                                        const MonotoneSpec& spec,
                                        std::size_t max_comparisons = 1000000);

/// Marginal-contribution shape along one feature (co-features held at their
/// domain minimum): is_dme requires positive, strictly decreasing first
/// differences whose tail drops below tail_threshold times the first.
DmeFinding detect_dme(const GroveModel& m, const FeatureSchema& schema, int feature,
                      const CertifyOptions& opts = {});
DmeFinding detect_dme_values(const Vec& grid, const Vec& contributions, double tail_threshold);

/// Flags strong pairs whose members sit in different groups while the
/// dominant member's minimum 1-D derivative sits below slope_floor: the
/// additive form then forces the dominated subnet constant. Binary pairs are
/// exempt.
std::vector<StructuralHazard> structural_guard(const FeatureSchema& schema, const MonotoneSpec& spec,
                                            const GroveArchitecture& arch,
                                            const CertificationReport& certify_output,
                                            double slope_floor = 1e-3);

}  // namespace monogrove
