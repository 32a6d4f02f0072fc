#include "monogrove/grove.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace monogrove {

const char* task_name(Task t) {
  return t == Task::Regression ? "regression" : "binary_classification";
}

Task task_from_name(const std::string& name) {
  if (name == "regression") return Task::Regression;
  if (name == "binary_classification") return Task::BinaryClassification;
  throw SchemaError("unknown task: " + name);
}

void GroveModel::check() const {
  if (subnets.size() != arch.groups.size())
    throw SchemaError("grove: expected one subnet per group");
  for (std::size_t g = 0; g < subnets.size(); ++g) {
    subnets[g].check();
    if (subnets[g].input_dim() != static_cast<int>(arch.groups[g].features.size()))
      throw SchemaError("grove: subnet " + std::to_string(g) + " input dim does not match group");
  }
}

GroveModel make_grove(const GroveArchitecture& arch, Task task) {
  GroveModel m;
  m.arch = arch;
  m.task = task;
  for (const Group& g : arch.groups)
    m.subnets.push_back(make_subnet(static_cast<int>(g.features.size()), g.hidden, g.activation));
  m.centering = Vec::Zero(m.num_groups());
  m.check();
  return m;
}

GroveModel random_grove(const GroveArchitecture& arch, Task task, Rng& rng, double scale) {
  GroveModel m;
  m.arch = arch;
  m.task = task;
  for (const Group& g : arch.groups)
    m.subnets.push_back(
        random_subnet(static_cast<int>(g.features.size()), g.hidden, g.activation, rng, scale));
  m.centering = Vec::Zero(m.num_groups());
  m.check();
  return m;
}

Vec group_slice(ConstRefVec& x, const Group& g) {
  Vec s(g.features.size());
  for (std::size_t i = 0; i < g.features.size(); ++i) s(i) = x(g.features[i]);
  return s;
}

Mat group_slice_cols(ConstRefMat& X, const Group& g) {
  Mat s(X.rows(), g.features.size());
  for (std::size_t i = 0; i < g.features.size(); ++i) s.col(i) = X.col(g.features[i]);
  return s;
}

Prediction predict(const GroveModel& m, ConstRefVec& x) {
  if (x.size() != m.arch.num_features())
    throw SchemaError("predict: input has dimension " + std::to_string(x.size()) +
                      ", expected " + std::to_string(m.arch.num_features()));
  double score = m.intercept;
  for (int g = 0; g < m.num_groups(); ++g) {
    Vec s = group_slice(x, m.arch.groups[g]);
    score += eval(m.subnets[g], s);
  }
  Prediction p;
  p.score = score;
  if (m.task == Task::BinaryClassification) p.probability = 1.0 / (1.0 + std::exp(-score));
  return p;
}

Vec predict_scores(const GroveModel& m, ConstRefMat& X) {
  if (X.cols() != m.arch.num_features()) throw SchemaError("predict_scores: column mismatch");
  Vec scores = Vec::Constant(X.rows(), m.intercept);
  for (int g = 0; g < m.num_groups(); ++g) {
    Mat s = group_slice_cols(X, m.arch.groups[g]);
    scores += eval_batch(m.subnets[g], s);
  }
  return scores;
}

double subnet_contribution(const GroveModel& m, int group, ConstRefVec& x_slice) {
  if (group < 0 || group >= m.num_groups())
    throw SchemaError("unknown group index: " + std::to_string(group));
  return eval(m.subnets[group], x_slice);
}

Vec input_partials(const GroveModel& m, ConstRefVec& x) {
  if (x.size() != m.arch.num_features()) throw SchemaError("input_partials: dimension mismatch");
  Vec grad = Vec::Zero(x.size());
  for (int g = 0; g < m.num_groups(); ++g) {
    const Group& grp = m.arch.groups[g];
    Vec s = group_slice(x, grp);
    EvalRecord r = eval_full(m.subnets[g], s);
    for (std::size_t i = 0; i < grp.features.size(); ++i) grad(grp.features[i]) = r.input_grad(i);
  }
  return grad;
}

void center_contributions(GroveModel& m, const FeatureSchema& schema) {
  for (int g = 0; g < m.num_groups(); ++g) {
    const Group& grp = m.arch.groups[g];
    Vec lo(grp.features.size());
    for (std::size_t i = 0; i < grp.features.size(); ++i) lo(i) = schema.features[grp.features[i]].lo;
    double c = eval(m.subnets[g], lo);
    m.subnets[g].out_bias -= c;
    m.intercept += c;
    m.centering(g) += c;
  }
}

int num_params(const GroveModel& m) {
  int n = 1;
  for (const SubnetParams& s : m.subnets) n += s.num_params();
  return n;
}

int group_param_offset(const GroveModel& m, int group) {
  int off = 1;
  for (int g = 0; g < group; ++g) off += m.subnets[g].num_params();
  return off;
}

Vec flatten(const GroveModel& m) {
  Vec v(num_params(m));
  v(0) = m.intercept;
  Eigen::Index k = 1;
  for (const SubnetParams& s : m.subnets) {
    Vec sv = flatten_params(s);
    v.segment(k, sv.size()) = sv;
    k += sv.size();
  }
  return v;
}

void set_params(GroveModel& m, ConstRefVec& theta) {
  if (theta.size() != num_params(m)) throw SchemaError("set_params: length mismatch");
  m.intercept = theta(0);
  Eigen::Index k = 1;
  for (SubnetParams& s : m.subnets) {
    Eigen::Index n = s.num_params();
    s = unflatten_params(s, theta.segment(k, n));
    k += n;
  }
}

double Scaler::transform_one(int feature, double v) const {
  const ScalerEntry& e = entries.at(feature);
  return e.applied ? (v - e.mean) / e.sd : v;
}

namespace {

using nlohmann::json;

json feature_to_json(const Feature& f) {
  json j;
  j["name"] = f.name;
  j["kind"] = feature_kind_name(f.kind);
  j["domain"] = {f.lo, f.hi};
  if (f.truncate_at) j["truncate_at"] = *f.truncate_at;
  return j;
}

Feature feature_from_json(const json& j) {
  Feature f;
  f.name = j.at("name").get<std::string>();
  f.kind = feature_kind_from_name(j.at("kind").get<std::string>());
  f.lo = j.at("domain").at(0).get<double>();
  f.hi = j.at("domain").at(1).get<double>();
  if (j.contains("truncate_at")) f.truncate_at = j["truncate_at"].get<double>();
  return f;
}

}  // namespace

std::string model_to_json(const GroveModel& m, const FeatureSchema& schema, const Scaler* scaler) {
  m.check();
  json j;
  j["format_version"] = 1;
  j["task"] = task_name(m.task);
  j["intercept"] = m.intercept;
  json feats = json::array();
  for (const Feature& f : schema.features) feats.push_back(feature_to_json(f));
  j["features"] = feats;
  json groups = json::array();
  for (int g = 0; g < m.num_groups(); ++g) {
    const Group& grp = m.arch.groups[g];
    json jg;
    json names = json::array();
    for (int f : grp.features) names.push_back(schema.features.at(f).name);
    jg["features"] = names;
    jg["hidden"] = grp.hidden;
    jg["activation"] = activation_name(grp.activation);
    Vec theta = flatten_params(m.subnets[g]);
    jg["params"] = std::vector<double>(theta.data(), theta.data() + theta.size());
    groups.push_back(jg);
  }
  j["groups"] = groups;
  j["centering"] = std::vector<double>(m.centering.data(), m.centering.data() + m.centering.size());
  if (scaler) {
    json js = json::array();
    for (const ScalerEntry& e : scaler->entries)
      js.push_back({{"applied", e.applied}, {"mean", e.mean}, {"sd", e.sd}});
    j["scaler"] = js;
  }
  return j.dump(2) + "\n";
}

LoadedModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("model file is not valid JSON: ") + e.what());
  }
  LoadedModel out;
  try {
    if (j.at("format_version").get<int>() != 1) throw IoError("unsupported model format version");
    for (const auto& f : j.at("features")) out.schema.features.push_back(feature_from_json(f));
    out.schema.check();
    GroveModel& m = out.model;
    m.task = task_from_name(j.at("task").get<std::string>());
    m.intercept = j.at("intercept").get<double>();
    for (const auto& jg : j.at("groups")) {
      Group grp;
      for (const auto& n : jg.at("features"))
        grp.features.push_back(out.schema.require(n.get<std::string>()));
      grp.hidden = jg.at("hidden").get<std::vector<int>>();
      grp.activation = activation_from_name(jg.at("activation").get<std::string>());
      SubnetParams sp =
          make_subnet(static_cast<int>(grp.features.size()), grp.hidden, grp.activation);
      auto vals = jg.at("params").get<std::vector<double>>();
      sp = unflatten_params(sp, Eigen::Map<const Vec>(vals.data(), vals.size()));
      m.arch.groups.push_back(std::move(grp));
      m.subnets.push_back(std::move(sp));
    }
    auto cent = j.at("centering").get<std::vector<double>>();
    m.centering = Eigen::Map<const Vec>(cent.data(), cent.size());
    if (j.contains("scaler")) {
      Scaler sc;
      for (const auto& je : j["scaler"])
        sc.entries.push_back({je.at("applied").get<bool>(), je.at("mean").get<double>(),
                              je.at("sd").get<double>()});
      out.scaler = std::move(sc);
    }
    m.check();
  } catch (const json::exception& e) {
    throw IoError(std::string("bad model file: ") + e.what());
  }
  return out;
}

void save_model(const std::string& path, const GroveModel& m, const FeatureSchema& schema,
                const Scaler* scaler) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file: " + path);
  out << model_to_json(m, schema, scaler);
}

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace monogrove
