#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "monogrove/grove.hpp"
#include "monogrove/schema.hpp"
#include "monogrove/types.hpp"

namespace monogrove {

struct Dataset {
  Mat X;
  Vec y;
  FeatureSchema schema;

  Eigen::Index rows() const { return X.rows(); }
};

/// Preprocessing recipe: which column is the target, what gets dropped,
/// truncated, or excluded, and the declared kind of each kept column.
struct Recipe {
  std::string name = "custom";
  std::string target_column;
  bool drop_missing = true;
  std::map<std::string, double> truncations;     // column -> cap
  std::vector<std::string> excluded;             // dropped columns
  std::map<std::string, FeatureKind> kinds;      // default continuous
  std::vector<std::string> feature_order;        // optional explicit column order
};

/// Built-in recipes: "gmsc", "compas", "heart" (the expected CSV headers are
/// documented in the README).
Recipe builtin_recipe(const std::string& name);
Recipe recipe_from_json_file(const std::string& path);
bool is_builtin_recipe(const std::string& name);

struct LoadReport {
  std::size_t rows_read = 0;
  std::size_t rows_dropped_missing = 0;
  std::size_t rows_kept = 0;
};

/// CSV ingestion: comma-separated, one header row, numeric cells; empty
/// cells and "NA"/"nan" count as missing. Applies drop/truncate/exclude and
/// derives feature domains from the kept rows.
Dataset load_csv(const std::string& path, const Recipe& recipe, LoadReport* report = nullptr);
Dataset parse_csv(const std::string& text, const Recipe& recipe, LoadReport* report = nullptr);

/// Disjoint, exhaustive, deterministic by seed.
std::pair<Dataset, Dataset> split(const Dataset& ds, double fraction, std::uint64_t seed);

/// Scales continuous features by train statistics (count and binary features
/// stay raw so constraint domains remain interpretable); the test set uses
/// the train scaler. Zero-variance columns are left unscaled with a warning.
/// Continuous schema domains are recomputed from the standardized train data.
Scaler standardize(Dataset& train, Dataset& test);

}  // namespace monogrove
