#include "monogrove/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace monogrove {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && (std::isspace(static_cast<unsigned char>(s[a])) || s[a] == '"')) ++a;
  while (b > a && (std::isspace(static_cast<unsigned char>(s[b - 1])) || s[b - 1] == '"')) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

bool is_missing(const std::string& cell) {
  if (cell.empty()) return true;
  std::string low;
  for (char c : cell) low += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return low == "na" || low == "nan" || low == "null";
}

bool parse_number(const std::string& cell, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(cell, &pos);
    while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
    return pos == cell.size();
  } catch (...) {
    return false;
  }
}

}  // namespace

bool is_builtin_recipe(const std::string& name) {
  return name == "gmsc" || name == "compas" || name == "heart";
}

Recipe builtin_recipe(const std::string& name) {
  Recipe r;
  r.name = name;
  r.drop_missing = true;
  if (name == "gmsc") {
    r.target_column = "SeriousDlqin2yrs";
    r.excluded = {"_col0", "age"};
    for (const char* c : {"NumberOfTime30-59DaysPastDueNotWorse", "NumberOfTimes90DaysLate",
                          "NumberOfTime60-89DaysPastDueNotWorse"}) {
      r.truncations[c] = 4;
      r.kinds[c] = FeatureKind::Count;
    }
    r.kinds["NumberOfOpenCreditLinesAndLoans"] = FeatureKind::Count;
    r.kinds["NumberRealEstateLoansOrLines"] = FeatureKind::Count;
    r.kinds["NumberOfDependents"] = FeatureKind::Count;
    return r;
  }
  if (name == "compas") {
    r.target_column = "two_year_recid";
    r.excluded = {"_col0", "id", "race", "sex", "decile_score", "compas_score"};
    r.truncations["juv_fel_count"] = 3;
    r.truncations["juv_misd_count"] = 3;
    r.kinds["juv_fel_count"] = FeatureKind::Count;
    r.kinds["juv_misd_count"] = FeatureKind::Count;
    r.kinds["priors_count"] = FeatureKind::Count;
    r.kinds["charge_degree"] = FeatureKind::Binary;
    return r;
  }
  if (name == "heart") {
    r.target_column = "DEATH_EVENT";
    for (const char* c : {"anaemia", "high_blood_pressure", "diabetes", "smoking", "sex"})
      r.kinds[c] = FeatureKind::Binary;
    return r;
  }
  throw IoError("unknown built-in recipe: " + name);
}

Recipe recipe_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open recipe file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("recipe file is not valid JSON: ") + e.what());
  }
  Recipe r;
  try {
    r.name = j.value("name", std::string("custom"));
    r.target_column = j.at("target_column").get<std::string>();
    r.drop_missing = j.value("drop_missing", true);
    if (j.contains("truncations"))
      for (auto& [k, v] : j["truncations"].items()) r.truncations[k] = v.get<double>();
    if (j.contains("excluded")) r.excluded = j["excluded"].get<std::vector<std::string>>();
    if (j.contains("kinds"))
      for (auto& [k, v] : j["kinds"].items())
        r.kinds[k] = feature_kind_from_name(v.get<std::string>());
    if (j.contains("feature_order"))
      r.feature_order = j["feature_order"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad recipe file: ") + e.what());
  }
  return r;
}

Dataset parse_csv(const std::string& text, const Recipe& recipe, LoadReport* report) {
  std::vector<std::string> lines;
  {
    std::string line;
    std::stringstream ss(text);
    while (std::getline(ss, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) lines.push_back(line);
    }
  }
  if (lines.empty()) throw IoError("CSV has no header row");

  std::vector<std::string> header = split_line(lines[0]);
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i].empty()) header[i] = "_col" + std::to_string(i);

  auto col_of = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };

  int target_col = col_of(recipe.target_column);
  if (target_col < 0) throw IoError("target column not found: " + recipe.target_column);
  for (const auto& [name, cap] : recipe.truncations) {
    (void)cap;
    if (col_of(name) < 0) throw IoError("truncation references unknown column: " + name);
  }

  std::vector<std::string> kept;
  if (!recipe.feature_order.empty()) {
    kept = recipe.feature_order;
    for (const auto& name : kept)
      if (col_of(name) < 0) throw IoError("feature_order references unknown column: " + name);
  } else {
    for (const std::string& name : header) {
      if (name == recipe.target_column) continue;
      if (std::find(recipe.excluded.begin(), recipe.excluded.end(), name) !=
          recipe.excluded.end())
        continue;
      kept.push_back(name);
    }
  }
  if (kept.empty()) throw IoError("no feature columns remain after exclusions");
  std::vector<int> kept_cols;
  for (const auto& name : kept) kept_cols.push_back(col_of(name));

  std::vector<std::vector<double>> rows;
  std::size_t dropped = 0;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    std::vector<std::string> cells = split_line(lines[li]);
    if (cells.size() != header.size())
      throw IoError("row " + std::to_string(li + 1) + " has " + std::to_string(cells.size()) +
                    " cells, expected " + std::to_string(header.size()));
    std::vector<double> row(kept.size() + 1);
    bool missing = false;
    auto read_cell = [&](int col, double& out) {
      const std::string& cell = cells[col];
      if (is_missing(cell)) {
        missing = true;
        return true;
      }
      if (!parse_number(cell, out))
        throw IoError("row " + std::to_string(li + 1) + ", column " + header[col] +
                      ": cannot parse '" + cell + "'");
      return true;
    };
    for (std::size_t k = 0; k < kept_cols.size(); ++k) read_cell(kept_cols[k], row[k]);
    read_cell(target_col, row[kept.size()]);
    if (missing) {
      if (!recipe.drop_missing)
        throw IoError("row " + std::to_string(li + 1) + " has missing values");
      ++dropped;
      continue;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("no rows left after preprocessing");

  Dataset ds;
  ds.X.resize(rows.size(), kept.size());
  ds.y.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < kept.size(); ++k) ds.X(i, k) = rows[i][k];
    ds.y(i) = rows[i][kept.size()];
  }

  for (std::size_t k = 0; k < kept.size(); ++k) {
    auto it = recipe.truncations.find(kept[k]);
    if (it != recipe.truncations.end())
      ds.X.col(k) = ds.X.col(k).cwiseMin(it->second);
  }

  for (std::size_t k = 0; k < kept.size(); ++k) {
    Feature f;
    f.name = kept[k];
    auto kin = recipe.kinds.find(kept[k]);
    f.kind = kin == recipe.kinds.end() ? FeatureKind::Continuous : kin->second;
    double lo = ds.X.col(k).minCoeff(), hi = ds.X.col(k).maxCoeff();
    auto trunc = recipe.truncations.find(kept[k]);
    if (trunc != recipe.truncations.end()) {
      f.truncate_at = trunc->second;
      hi = trunc->second;
    }
    if (f.kind == FeatureKind::Binary) {
      for (Eigen::Index i = 0; i < ds.X.rows(); ++i)
        if (ds.X(i, k) != 0.0 && ds.X(i, k) != 1.0)
          throw IoError("column " + kept[k] + " declared binary but holds " +
                        std::to_string(ds.X(i, k)));
      lo = 0;
      hi = 1;
    }
    if (!(lo < hi)) hi = lo + 1;  // constant column; standardize() warns later
    f.lo = lo;
    f.hi = hi;
    ds.schema.features.push_back(std::move(f));
  }
  ds.schema.check();

  if (report) {
    report->rows_read = lines.size() - 1;
    report->rows_dropped_missing = dropped;
    report->rows_kept = rows.size();
  }
  return ds;
}

Dataset load_csv(const std::string& path, const Recipe& recipe, LoadReport* report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open data file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), recipe, report);
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw Error("split: fraction must be in (0, 1)");
  const Eigen::Index n = ds.rows();
  Eigen::Index n_train = static_cast<Eigen::Index>(std::llround(fraction * static_cast<double>(n)));
  if (n_train < 1 || n_train >= n)
    throw Error("split: dataset too small for fraction " + std::to_string(fraction));

  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (Eigen::Index i = n - 1; i > 0; --i)
    std::swap(idx[i], idx[rng.integer(static_cast<std::uint64_t>(i + 1))]);

  auto take = [&](Eigen::Index from, Eigen::Index count) {
    Dataset out;
    out.schema = ds.schema;
    out.X.resize(count, ds.X.cols());
    out.y.resize(count);
    for (Eigen::Index i = 0; i < count; ++i) {
      out.X.row(i) = ds.X.row(idx[from + i]);
      out.y(i) = ds.y(idx[from + i]);
    }
    return out;
  };
  return {take(0, n_train), take(n_train, n - n_train)};
}

Scaler standardize(Dataset& train, Dataset& test) {
  if (train.rows() == 0) throw Error("standardize: empty training set");
  Scaler sc;
  sc.entries.resize(train.schema.size());
  const double n = static_cast<double>(train.rows());
  for (int k = 0; k < train.schema.size(); ++k) {
    Feature& f = train.schema.features[k];
    if (f.kind != FeatureKind::Continuous) continue;
    double mean = train.X.col(k).mean();
    double sd = std::sqrt((train.X.col(k).array() - mean).square().sum() / n);
    if (!(sd > 0)) {
      sc.warnings.push_back("feature " + f.name + " has zero variance; left unscaled");
      continue;
    }
    sc.entries[k].applied = true;
    sc.entries[k].mean = mean;
    sc.entries[k].sd = sd;
    train.X.col(k) = (train.X.col(k).array() - mean) / sd;
    if (test.rows() > 0) test.X.col(k) = (test.X.col(k).array() - mean) / sd;
    f.lo = train.X.col(k).minCoeff();
    f.hi = train.X.col(k).maxCoeff();
    if (!(f.lo < f.hi)) f.hi = f.lo + 1;
  }
  test.schema = train.schema;
  return sc;
}

}  // namespace monogrove
