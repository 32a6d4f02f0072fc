#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "monogrove/certifier.hpp"
#include "monogrove/dataio.hpp"
#include "monogrove/metrics.hpp"
#include "monogrove/penalty.hpp"
#include "monogrove/separability.hpp"
#include "monogrove/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace monogrove;

namespace {

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  out << text;
}

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ------------------------------------------------------------------
// shared option bundles
// ------------------------------------------------------------------

struct CommonOpts {
  std::string out_dir;

  void finalize() {
    if (out_dir.empty()) {
      const char* env = std::getenv("MONOGROVE_OUT");
      out_dir = env && *env ? env : ".";
    }
    fs::create_directories(out_dir);
  }
  std::string path(const std::string& name) const { return (fs::path(out_dir) / name).string(); }
};

struct DataOpts {
  std::string data_path;
  std::string recipe_name;  // builtin name or json path
  std::string target_column = "target";
  double train_fraction = 0.75;

  Recipe recipe() const {
    if (recipe_name.empty()) {
      Recipe r;
      r.target_column = target_column;
      return r;
    }
    if (is_builtin_recipe(recipe_name)) return builtin_recipe(recipe_name);
    return recipe_from_json_file(recipe_name);
  }
};

struct SpecOpts {
  std::string spec_path;

  // The spec file declares feature semantics the CSV cannot carry. Kinds are
  // merged into the recipe before loading (so counts and binaries skip
  // standardization); count/binary domains override the data-derived ones.
  void merge_kinds(Recipe& recipe) const {
    if (spec_path.empty()) return;
    SpecFile sf = load_spec_file(spec_path);
    for (const Feature& f : sf.schema.features) {
      recipe.kinds[f.name] = f.kind;
      if (f.truncate_at) recipe.truncations[f.name] = *f.truncate_at;
    }
  }

  void apply_domains(FeatureSchema& data_schema) const {
    if (spec_path.empty()) return;
    SpecFile sf = load_spec_file(spec_path);
    for (const Feature& f : sf.schema.features) {
      int i = data_schema.index_of(f.name);
      if (i < 0) continue;
      if (f.kind != FeatureKind::Continuous) {
        data_schema.features[i].lo = f.lo;
        data_schema.features[i].hi = f.hi;
      }
    }
  }

  // Constraints and subnet shape bound against a data-derived schema. The
  // spec file's feature list must be a subset of the dataset's columns.
  // Built-in recipes carry default constraints.
  void resolve(const FeatureSchema& data_schema, const std::string& recipe_name,
               MonotoneSpec& spec, std::vector<int>& hidden, Activation& act) const {
    hidden = {2};
    act = Activation::Logistic;
    if (!spec_path.empty()) {
      SpecFile sf = load_spec_file(spec_path);
      for (const Feature& f : sf.schema.features)
        if (data_schema.index_of(f.name) < 0)
          throw SchemaError("spec file names feature absent from the data: " + f.name);
      spec = sf.spec;
      hidden = sf.hidden;
      act = sf.activation;
      return;
    }
    if (recipe_name == "gmsc") {
      spec.individual = {"NumberOfTime30-59DaysPastDueNotWorse",
                         "NumberOfTime60-89DaysPastDueNotWorse", "NumberOfTimes90DaysLate"};
      spec.strong_pairs = {
          {"NumberOfTimes90DaysLate", "NumberOfTime60-89DaysPastDueNotWorse"},
          {"NumberOfTime60-89DaysPastDueNotWorse", "NumberOfTime30-59DaysPastDueNotWorse"}};
      return;
    }
    if (recipe_name == "compas") {
      spec.individual = {"juv_fel_count", "juv_misd_count", "priors_count"};
      spec.strong_pairs = {{"juv_fel_count", "juv_misd_count"}};
      return;
    }
    if (recipe_name == "heart") {
      spec.individual = {"anaemia", "high_blood_pressure", "diabetes", "smoking"};
      spec.strong_pairs = {{"anaemia", "smoking"},
                           {"high_blood_pressure", "smoking"},
                           {"diabetes", "smoking"}};
      return;
    }
  }
};

struct TrainOpts {
  TrainConfig config;
  std::string optimizer = "adam";
  bool no_warm_start = false;

  void apply() {
    config.optimizer = optimizer_from_name(optimizer);
    config.warm_start = !no_warm_start;
    config.check();
  }
};

Task infer_task(const Vec& y, const std::string& flag) {
  if (flag == "regression") return Task::Regression;
  if (flag == "classification") return Task::BinaryClassification;
  if (!flag.empty() && flag != "auto") throw Error("unknown task: " + flag);
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y(i) != 0.0 && y(i) != 1.0) return Task::Regression;
  return Task::BinaryClassification;
}

enum class Family { Nam, Mnam, Gnam, Mgnam, Fcnn };

Family family_from_name(const std::string& name) {
  if (name == "nam") return Family::Nam;
  if (name == "mnam") return Family::Mnam;
  if (name == "gnam") return Family::Gnam;
  if (name == "mgnam") return Family::Mgnam;
  if (name == "fcnn") return Family::Fcnn;
  throw Error("unknown model family: " + name + " (expected nam|mnam|gnam|mgnam|fcnn)");
}

// Architecture plus the constraint set the trainer enforces. Certification
// always runs against the full declared constraints.
struct FamilyPlan {
  GroveArchitecture arch;
  MonotoneSpec train_spec;
};

FamilyPlan plan_family(Family family, const FeatureSchema& schema, const MonotoneSpec& spec,
                       const std::vector<int>& hidden, Activation act) {
  FamilyPlan plan;
  auto singletons = [&]() {
    GroveArchitecture a;
    for (int i = 0; i < schema.size(); ++i) {
      Group g;
      g.features = {i};
      g.hidden = hidden;
      g.activation = act;
      a.groups.push_back(g);
    }
    return a;
  };
  switch (family) {
    case Family::Nam:
      plan.arch = singletons();
      break;
    case Family::Mnam: {
      plan.arch = singletons();
      plan.train_spec = spec;
      // strong pairwise demands replaced by their weak counterparts
      for (const auto& pr : spec.strong_pairs) {
        bool dup = false;
        for (const auto& w : plan.train_spec.weak_pairs) dup |= w == pr;
        if (!dup) plan.train_spec.weak_pairs.push_back(pr);
      }
      plan.train_spec.strong_pairs.clear();
      break;
    }
    case Family::Gnam:
      plan.arch = derive_groups(schema, spec, hidden, act);
      break;
    case Family::Mgnam:
      plan.arch = derive_groups(schema, spec, hidden, act);
      plan.train_spec = spec;
      break;
    case Family::Fcnn: {
      Group g;
      for (int i = 0; i < schema.size(); ++i) g.features.push_back(i);
      g.hidden = hidden;
      g.activation = act;
      plan.arch.groups = {g};
      break;
    }
  }
  return plan;
}

void apply_scaler(Dataset& ds, const Scaler& sc) {
  if (static_cast<int>(sc.entries.size()) != ds.schema.size())
    throw SchemaError("scaler does not match the dataset width");
  for (int k = 0; k < ds.schema.size(); ++k)
    if (sc.entries[k].applied)
      ds.X.col(k) = (ds.X.col(k).array() - sc.entries[k].mean) / sc.entries[k].sd;
}

json metrics_to_json(const MetricSet& ms, Task task) {
  json j;
  if (task == Task::BinaryClassification) {
    j["classification_error"] = ms.classification_error;
    j["auc"] = ms.auc;
    j["logloss"] = ms.logloss;
  }
  if (ms.mse) j["mse"] = *ms.mse;
  return j;
}

std::vector<std::string> split_names(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// ------------------------------------------------------------------
// subcommands
// ------------------------------------------------------------------

int cmd_train(const CommonOpts& common, const DataOpts& data_opts, const SpecOpts& spec_opts,
              TrainOpts train_opts, const std::string& family_name, const std::string& task_flag,
              const std::string& model_out) {
  Family family = family_from_name(family_name);
  train_opts.apply();

  Recipe recipe = data_opts.recipe();
  spec_opts.merge_kinds(recipe);
  LoadReport load_report;
  Dataset full = load_csv(data_opts.data_path, recipe, &load_report);
  spec_opts.apply_domains(full.schema);
  std::cout << "loaded " << load_report.rows_kept << " rows (" << load_report.rows_read
            << " read, " << load_report.rows_dropped_missing << " dropped)\n";

  auto [train, test] = split(full, data_opts.train_fraction, train_opts.config.seed);
  Scaler scaler = standardize(train, test);
  for (const std::string& w : scaler.warnings) std::cerr << "warning: " << w << "\n";

  MonotoneSpec spec;
  std::vector<int> hidden;
  Activation act;
  spec_opts.resolve(train.schema, recipe.name, spec, hidden, act);
  spec.check(train.schema);

  Task task = infer_task(train.y, task_flag);
  FamilyPlan plan = plan_family(family, train.schema, spec, hidden, act);

  FitResult result =
      fit(train.X, train.y, train.schema, plan.train_spec, plan.arch, task, train_opts.config);

  MetricSet test_metrics = evaluate_model(result.model, test.X, test.y);

  std::string model_path = model_out.empty() ? common.path("model.json") : model_out;
  save_model(model_path, result.model, train.schema, &scaler);
  spit(common.path("trace.csv"), trace_to_csv(result.trace));
  spit(common.path("metrics.json"), metrics_to_json(test_metrics, task).dump(2) + "\n");

  json config_json;
  config_json["family"] = family_name;
  config_json["task"] = task_name(task);
  config_json["seed"] = train_opts.config.seed;
  config_json["learning_rate"] = train_opts.config.learning_rate;
  config_json["epochs_per_round"] = train_opts.config.epochs_per_round;
  config_json["batch_size"] = train_opts.config.batch_size;
  config_json["lambda_init"] = train_opts.config.lambda_init;
  config_json["lambda_factor"] = train_opts.config.lambda_factor;
  config_json["max_rounds"] = train_opts.config.max_rounds;
  config_json["epsilon"] = train_opts.config.epsilon;
  config_json["grid_points_1d"] = train_opts.config.grid.points_1d;
  config_json["grid_points_group"] = train_opts.config.grid.points_group;
  config_json["optimizer"] = train_opts.optimizer;
  config_json["warm_start"] = train_opts.config.warm_start;
  config_json["positive_weight"] = train_opts.config.positive_weight;
  config_json["train_fraction"] = data_opts.train_fraction;
  config_json["recipe"] = recipe.name;

  json manifest;
  manifest["config"] = config_json;
  manifest["config_hash"] = hex64(fnv1a64(config_json.dump()));
  manifest["seed"] = train_opts.config.seed;
  manifest["data_file"] = data_opts.data_path;
  manifest["data_fingerprint"] = hex64(fnv1a64(slurp(data_opts.data_path)));
  manifest["outputs"] = {{"model", model_path},
                         {"trace", common.path("trace.csv")},
                         {"metrics", common.path("metrics.json")}};
  manifest["certified"] = result.certified;
  manifest["rounds"] = result.trace.rounds.size();
  manifest["created_utc"] = utc_now();
  spit(common.path("manifest.json"), manifest.dump(2) + "\n");

  const RoundRecord& last = result.trace.rounds.back();
  std::cout << "rounds: " << result.trace.rounds.size() << ", final penalties (eps=0): h1="
            << fmt(last.h1) << " h2=" << fmt(last.h2) << " h3=" << fmt(last.h3) << "\n";
  if (task == Task::BinaryClassification)
    std::cout << "test error: " << fmt(test_metrics.classification_error)
              << ", test auc: " << fmt(test_metrics.auc) << "\n";
  else
    std::cout << "test mse: " << fmt(test_metrics.mse.value_or(0.0)) << "\n";
  std::cout << "model: " << model_path << (result.certified ? " (certified)" : " (UNCERTIFIED)")
            << "\n";
  return result.certified ? 0 : 2;
}

int cmd_certify(const CommonOpts& common, const std::string& model_path,
                const SpecOpts& spec_opts, const std::string& recipe_name, bool discrete,
                CertifyOptions opts) {
  LoadedModel lm = load_model(model_path);
  MonotoneSpec spec;
  std::vector<int> hidden;
  Activation act;
  spec_opts.resolve(lm.schema, recipe_name, spec, hidden, act);
  if (spec.empty()) std::cerr << "warning: empty constraint set, nothing to certify\n";
  spec.check(lm.schema);

  CertificationReport rep = discrete ? certify_discrete(lm.model, lm.schema, spec)
                                     : certify(lm.model, lm.schema, spec, opts);
  spit(common.path("certification.json"), report_to_json(rep));
  std::cout << report_summary(rep);
  return rep.all_pass() ? 0 : 2;
}

int cmd_evaluate(const CommonOpts& common, const std::string& model_path,
                 const DataOpts& data_opts, std::uint64_t seed, const std::string& side) {
  LoadedModel lm = load_model(model_path);
  Recipe recipe = data_opts.recipe();
  Dataset full = load_csv(data_opts.data_path, recipe);

  if (full.schema.size() != lm.schema.size())
    throw SchemaError("dataset width does not match the model");
  for (int k = 0; k < full.schema.size(); ++k)
    if (full.schema.features[k].name != lm.schema.features[k].name)
      throw SchemaError("dataset column " + full.schema.features[k].name +
                        " does not match the model's " + lm.schema.features[k].name);

  Dataset chosen = std::move(full);
  if (side != "all") {
    auto [train, test] = split(chosen, data_opts.train_fraction, seed);
    chosen = side == "train" ? std::move(train) : std::move(test);
  }
  if (lm.scaler) apply_scaler(chosen, *lm.scaler);

  MetricSet ms = evaluate_model(lm.model, chosen.X, chosen.y);
  json j = metrics_to_json(ms, lm.model.task);
  j["rows"] = chosen.rows();
  j["side"] = side;
  spit(common.path("metrics.json"), j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_separability(const CommonOpts& common, const DataOpts& data_opts,
                     const SpecOpts& spec_opts, TrainOpts train_opts, const std::string& u_csv,
                     const std::string& v_csv, double eps, const std::string& task_flag) {
  train_opts.apply();
  Recipe recipe = data_opts.recipe();
  spec_opts.merge_kinds(recipe);
  Dataset full = load_csv(data_opts.data_path, recipe);
  spec_opts.apply_domains(full.schema);
  Dataset empty_test;
  empty_test.schema = full.schema;
  empty_test.X.resize(0, full.X.cols());
  empty_test.y.resize(0);
  standardize(full, empty_test);

  MonotoneSpec spec;
  std::vector<int> hidden;
  Activation act;
  spec_opts.resolve(full.schema, recipe.name, spec, hidden, act);

  std::vector<int> u, v;
  for (const std::string& n : split_names(u_csv)) u.push_back(full.schema.require(n));
  for (const std::string& n : split_names(v_csv)) v.push_back(full.schema.require(n));

  SeparabilityConfig cfg;
  cfg.threshold_eps = eps;
  cfg.hidden = hidden;
  cfg.train = train_opts.config;
  SeparabilityVerdict verdict = test_separability(full.X, full.y, infer_task(full.y, task_flag),
                                                  full.schema, spec, u, v, cfg);
  spit(common.path("separability.json"), verdict_to_json(verdict));
  std::cout << verdict_to_json(verdict);
  return 0;
}

int cmd_export_tables(const CommonOpts& common, const std::string& model_path,
                      const std::string& group_sel, double table_max) {
  LoadedModel lm = load_model(model_path);
  const GroveModel& m = lm.model;

  std::string out = "group,point,features,value\n";
  bool any = false;
  for (int g = 0; g < m.num_groups(); ++g) {
    const Group& grp = m.arch.groups[g];
    std::string gname;
    for (std::size_t i = 0; i < grp.features.size(); ++i)
      gname += (i ? "+" : "") + lm.schema.features[grp.features[i]].name;
    if (!group_sel.empty() && gname != group_sel) continue;
    bool integer_domain = true;
    for (int f : grp.features)
      integer_domain &= lm.schema.features[f].kind != FeatureKind::Continuous;
    if (!integer_domain) continue;
    any = true;

    std::vector<Vec> axes;
    for (int f : grp.features) {
      Feature ft = lm.schema.features[f];
      if (table_max >= 0) ft.hi = std::min(ft.hi, table_max);
      axes.push_back(feature_axis(ft, 2));
    }
    if (lattice_size(axes) == 0) throw Error("export-tables: empty lattice");
    for_each_lattice(axes, [&](const Vec& point) {
      std::string coords;
      for (Eigen::Index i = 0; i < point.size(); ++i)
        coords += (i ? ";" : "") + fmt(point(i));
      out += gname + "," + coords + ",\"";
      for (std::size_t i = 0; i < grp.features.size(); ++i)
        out += (i ? ";" : "") + lm.schema.features[grp.features[i]].name;
      out += "\"," + fmt(subnet_contribution(m, g, point)) + "\n";
    });
  }
  if (!any)
    throw Error(group_sel.empty() ? "export-tables: no group with an integer lattice"
                                  : "export-tables: unknown group " + group_sel);
  spit(common.path("tables.csv"), out);
  std::cout << "wrote " << common.path("tables.csv") << "\n";
  return 0;
}

int cmd_export_curves(const CommonOpts& common, const std::string& model_path, int points) {
  LoadedModel lm = load_model(model_path);
  const GroveModel& m = lm.model;
  if (points < 2) throw Error("export-curves: need at least 2 points");

  std::string out = "feature,x,value\n";
  for (int f = 0; f < lm.schema.size(); ++f) {
    const Feature& ft = lm.schema.features[f];
    int g = m.arch.group_of(f);
    if (g < 0) continue;
    const Group& grp = m.arch.groups[g];
    int pos = grp.position_of(f);
    Vec axis = ft.kind == FeatureKind::Continuous ? dense_axis(ft, points) : feature_axis(ft, 2);
    Vec x(grp.features.size());
    for (std::size_t i = 0; i < grp.features.size(); ++i)
      x(i) = lm.schema.features[grp.features[i]].lo;
    for (Eigen::Index i = 0; i < axis.size(); ++i) {
      x(pos) = axis(i);
      out += ft.name + "," + fmt(axis(i)) + "," + fmt(subnet_contribution(m, g, x)) + "\n";
    }
  }
  spit(common.path("curves.csv"), out);
  std::cout << "wrote " << common.path("curves.csv") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"monogrove: monotone grove training, certification and export"};
  app.require_subcommand(1);

  CommonOpts common;
  DataOpts data_opts;
  SpecOpts spec_opts;
  TrainOpts train_opts;
  std::string family = "mgnam", task_flag = "auto", model_out, model_path;
  std::string group_sel, u_csv, v_csv, eval_side = "test";
  bool discrete = false;
  double table_max = -1, sep_eps = 0.005;
  int curve_points = 64;
  CertifyOptions cert_opts;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out-dir", common.out_dir, "output directory (default $MONOGROVE_OUT or .)");
  };
  auto add_data = [&](CLI::App* cmd) {
    cmd->add_option("--data", data_opts.data_path, "CSV input")->required();
    cmd->add_option("--recipe", data_opts.recipe_name, "built-in recipe name or recipe JSON path");
    cmd->add_option("--target", data_opts.target_column, "target column when no recipe is given");
    cmd->add_option("--train-fraction", data_opts.train_fraction, "train share of the split");
  };
  auto add_train = [&](CLI::App* cmd) {
    cmd->add_option("--seed", train_opts.config.seed, "rng seed");
    cmd->add_option("--lr", train_opts.config.learning_rate, "learning rate");
    cmd->add_option("--epochs", train_opts.config.epochs_per_round, "epochs per round");
    cmd->add_option("--batch-size", train_opts.config.batch_size, "0 = full batch");
    cmd->add_option("--lambda-init", train_opts.config.lambda_init, "first nonzero penalty weight");
    cmd->add_option("--lambda-factor", train_opts.config.lambda_factor, "penalty escalation factor");
    cmd->add_option("--max-rounds", train_opts.config.max_rounds, "escalation round limit");
    cmd->add_option("--epsilon", train_opts.config.epsilon, "training hinge floor");
    cmd->add_option("--grid-1d", train_opts.config.grid.points_1d, "training grid, singleton axes");
    cmd->add_option("--grid-group", train_opts.config.grid.points_group,
                    "training grid, per group dimension");
    cmd->add_option("--optimizer", train_opts.optimizer, "sgd|momentum|adam");
    cmd->add_flag("--no-warm-start", train_opts.no_warm_start, "re-initialize each round");
    cmd->add_option("--positive-weight", train_opts.config.positive_weight,
                    "class weight of label 1");
  };

  CLI::App* train = app.add_subcommand("train", "fit a model family on a dataset");
  add_common(train);
  add_data(train);
  add_train(train);
  train->add_option("--spec", spec_opts.spec_path, "constraint spec JSON");
  train->add_option("--model", family, "nam|mnam|gnam|mgnam|fcnn");
  train->add_option("--task", task_flag, "auto|classification|regression");
  train->add_option("--model-out", model_out, "model output path (default out-dir/model.json)");

  CLI::App* certify_cmd = app.add_subcommand("certify", "verify monotonicity of a saved model");
  add_common(certify_cmd);
  certify_cmd->add_option("--model", model_path, "model JSON")->required();
  certify_cmd->add_option("--spec", spec_opts.spec_path, "constraint spec JSON");
  certify_cmd->add_option("--recipe", data_opts.recipe_name,
                          "built-in recipe supplying default constraints");
  certify_cmd->add_flag("--discrete", discrete, "value-level brute force on integer domains");
  certify_cmd->add_option("--grid-1d", cert_opts.points_1d, "audit grid, singleton axes");
  certify_cmd->add_option("--grid-group", cert_opts.points_group, "audit grid, per dimension");

  CLI::App* evaluate = app.add_subcommand("evaluate", "metrics of a saved model on a dataset");
  add_common(evaluate);
  add_data(evaluate);
  evaluate->add_option("--model", model_path, "model JSON")->required();
  evaluate->add_option("--seed", train_opts.config.seed, "split seed used at training time");
  evaluate->add_option("--split", eval_side, "test|train|all");

  CLI::App* separability = app.add_subcommand("separability", "additive separability verdict");
  add_common(separability);
  add_data(separability);
  add_train(separability);
  separability->add_option("--spec", spec_opts.spec_path, "constraint spec JSON");
  separability->add_option("--u", u_csv, "comma-separated feature names of side U")->required();
  separability->add_option("--v", v_csv, "comma-separated feature names of side V");
  separability->add_option("--eps", sep_eps, "accuracy-gap threshold");
  separability->add_option("--task", task_flag, "auto|classification|regression");

  CLI::App* tables = app.add_subcommand("export-tables", "group contribution tables (CSV)");
  add_common(tables);
  tables->add_option("--model", model_path, "model JSON")->required();
  tables->add_option("--group", group_sel, "group name, e.g. a+b+c (default: all integer groups)");
  tables->add_option("--table-max", table_max, "cap every axis at this value");

  CLI::App* curves = app.add_subcommand("export-curves", "per-feature marginal curves (CSV)");
  add_common(curves);
  curves->add_option("--model", model_path, "model JSON")->required();
  curves->add_option("--points", curve_points, "samples per continuous axis");

  CLI11_PARSE(app, argc, argv);

  try {
    common.finalize();
    if (train->parsed())
      return cmd_train(common, data_opts, spec_opts, train_opts, family, task_flag, model_out);
    if (certify_cmd->parsed())
      return cmd_certify(common, model_path, spec_opts, data_opts.recipe_name, discrete,
                         cert_opts);
    if (evaluate->parsed())
      return cmd_evaluate(common, model_path, data_opts, train_opts.config.seed, eval_side);
    if (separability->parsed())
      return cmd_separability(common, data_opts, spec_opts, train_opts, u_csv, v_csv, sep_eps,
                              task_flag);
    if (tables->parsed()) return cmd_export_tables(common, model_path, group_sel, table_max);
    if (curves->parsed()) return cmd_export_curves(common, model_path, curve_points);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
