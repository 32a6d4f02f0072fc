#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "monogrove/subnet.hpp"
#include "monogrove/types.hpp"

namespace monogrove {

enum class FeatureKind { Continuous, Count, Binary };

const char* feature_kind_name(FeatureKind k);
FeatureKind feature_kind_from_name(const std::string& name);

struct Feature {
  std::string name;
  FeatureKind kind = FeatureKind::Continuous;
  double lo = 0.0;
  double hi = 1.0;
  std::optional<double> truncate_at;  // count features only
};

struct FeatureSchema {
  std::vector<Feature> features;

  int size() const { return static_cast<int>(features.size()); }
  int index_of(const std::string& name) const;  // -1 when absent
  int require(const std::string& name) const;   // throws SchemaError when absent
  void check() const;  // unique names, lo < hi, binary domains {0,1}
};

/// Declared monotonicity, increasing direction throughout. Pairs are ordered
/// (dominant, dominated): increments of the first feature matter at least as
/// much as increments of the second.
struct MonotoneSpec {
  std::vector<std::string> individual;
  std::vector<std::pair<std::string, std::string>> weak_pairs;
  std::vector<std::pair<std::string, std::string>> strong_pairs;

  bool empty() const { return individual.empty() && weak_pairs.empty() && strong_pairs.empty(); }

  // Membership against the schema, pair members also individually monotone,
  // no self-pairs, strong relation acyclic.
  void check(const FeatureSchema& schema) const;
};

struct Group {
  std::vector<int> features;  // schema indices, ascending
  std::vector<int> hidden = {2};
  Activation activation = Activation::Logistic;

  bool contains(int f) const;
  int position_of(int f) const;  // index within the group, -1 when absent
};

struct GroveArchitecture {
  std::vector<Group> groups;

  int group_of(int feature) const;  // -1 when the feature is unassigned
  int num_features() const;
};

struct ArchViolation {
  std::string code;  // "not-a-partition" | "split-strong-pair" | "split-component"
  std::string message;
  std::vector<std::string> features;
};

/// Connected components of the pairwise-constraint graph that contain at
/// least one strong pair of not-all-binary features become multi-feature
/// groups; everything else stays a singleton. Strong pairs between two binary
/// features do not force a group.
GroveArchitecture derive_groups(const FeatureSchema& schema, const MonotoneSpec& spec,
                                const std::vector<int>& hidden = {2},
                                Activation act = Activation::Logistic);

/// Empty result means the architecture can carry every declared constraint.
/// A split non-binary strong pair is reported as a structural hazard.
std::vector<ArchViolation> validate(const FeatureSchema& schema, const MonotoneSpec& spec,
                                    const GroveArchitecture& arch);

/// All strong orderings implied by transitivity, declared pairs included.
/// Throws SchemaError on a cycle.
std::vector<std::pair<std::string, std::string>> transitive_closure_strong(
    const MonotoneSpec& spec);

/// Constraint spec file: JSON object with keys `features`, `individual`,
/// `weak_pairs`, `strong_pairs`, `subnet`. See README for the field layout.
struct SpecFile {
  FeatureSchema schema;
  MonotoneSpec spec;
  std::vector<int> hidden = {2};
  Activation activation = Activation::Logistic;
};

SpecFile load_spec_file(const std::string& path);
SpecFile parse_spec_json(const std::string& text);

}  // namespace monogrove
