#include "monogrove/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "monogrove/metrics.hpp"

namespace monogrove {

OptimizerKind optimizer_from_name(const std::string& name) {
  if (name == "sgd") return OptimizerKind::Sgd;
  if (name == "momentum") return OptimizerKind::Momentum;
  if (name == "adam") return OptimizerKind::Adam;
  throw Error("unknown optimizer: " + name);
}

void TrainConfig::check() const {
  if (!(learning_rate > 0)) throw Error("learning_rate must be > 0");
  if (!(lambda_factor > 1)) throw Error("lambda_factor must be > 1");
  if (max_rounds < 1) throw Error("max_rounds must be >= 1");
  if (epochs_per_round < 0) throw Error("epochs_per_round must be >= 0");
  if (epsilon < 0) throw Error("epsilon must be >= 0");
  if (batch_size < 0) throw Error("batch_size must be >= 0");
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::pair<double, Vec> loss_on(const GroveModel& m, ConstRefMat& X, ConstRefVec& y,
                               double positive_weight) {
  const Eigen::Index n = X.rows();
  if (n == 0) throw Error("loss: empty data");
  Vec scores = predict_scores(m, X);

  double value = 0;
  Vec dscore(n);
  if (m.task == Task::Regression) {
    Vec resid = scores - y;
    value = resid.squaredNorm() / static_cast<double>(n);
    dscore = 2.0 * resid / static_cast<double>(n);
  } else {
    Vec w = y.unaryExpr([&](double yi) { return yi > 0.5 ? positive_weight : 1.0; });
    double wsum = w.sum();
    for (Eigen::Index i = 0; i < n; ++i) {
      double s = scores(i);
      double softplus = std::max(s, 0.0) + std::log1p(std::exp(-std::abs(s)));
      value += w(i) * (softplus - y(i) * s);
      double p = 1.0 / (1.0 + std::exp(-s));
      dscore(i) = w(i) * (p - y(i)) / wsum;
    }
    value /= wsum;
  }

  Vec grad = Vec::Zero(num_params(m));
  grad(0) = dscore.sum();
  for (int g = 0; g < m.num_groups(); ++g) {
    Mat Xg = group_slice_cols(X, m.arch.groups[g]);
    grad.segment(group_param_offset(m, g), m.subnets[g].num_params()) =
        weighted_param_grad(m.subnets[g], Xg, dscore);
  }
  return {value, std::move(grad)};
}

// Objective gradient at the current parameters.
std::pair<double, Vec> objective(const GroveModel& m, ConstRefMat& X, ConstRefVec& y,
                                 const FeatureSchema& schema, const MonotoneSpec& spec,
                                 const PenaltyGrid& grid, const Eigen::Vector3d& lambdas,
                                 double eps, double positive_weight) {
  auto [value, grad] = loss_on(m, X, y, positive_weight);
  if (lambdas(0) > 0) {
    PenaltyValue v = h1(m, schema, spec, grid, eps);
    value += lambdas(0) * v.value;
    grad += lambdas(0) * v.param_grad;
  }
  if (lambdas(1) > 0) {
    PenaltyValue v = h2(m, schema, spec, grid, eps);
    value += lambdas(1) * v.value;
    grad += lambdas(1) * v.param_grad;
  }
  if (lambdas(2) > 0) {
    PenaltyValue v = h3(m, schema, spec, grid, eps);
    value += lambdas(2) * v.value;
    grad += lambdas(2) * v.param_grad;
  }
  return {value, std::move(grad)};
}

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr, Eigen::Index n)
      : kind_(kind), lr_(lr), m_(Vec::Zero(n)), v_(Vec::Zero(n)) {}

  void step(Vec& theta, const Vec& grad) {
    ++t_;
    switch (kind_) {
      case OptimizerKind::Sgd:
        theta -= lr_ * grad;
        return;
      case OptimizerKind::Momentum:
        m_ = 0.9 * m_ + grad;
        theta -= lr_ * m_;
        return;
      case OptimizerKind::Adam: {
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        m_ = b1 * m_ + (1 - b1) * grad;
        v_ = b2 * v_.array() + (1 - b2) * grad.array().square();
        double c1 = 1 - std::pow(b1, t_);
        double c2 = 1 - std::pow(b2, t_);
        theta.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps);
        return;
      }
    }
  }

 private:
  OptimizerKind kind_;
  double lr_;
  Vec m_, v_;
  int t_ = 0;
};

}  // namespace

std::pair<double, Vec> loss(const GroveModel& m, ConstRefMat& X, ConstRefVec& y,
                            double positive_weight) {
  if (!X.allFinite() || !y.allFinite()) throw Error("loss: data contains NaN or infinity");
  return loss_on(m, X, y, positive_weight);
}

GroveModel train_round(const GroveModel& model, ConstRefMat& X, ConstRefVec& y,
                       const FeatureSchema& schema, const MonotoneSpec& spec,
                       const PenaltyGrid& grid, const Eigen::Vector3d& lambdas,
                       const TrainConfig& config, int round_index) {
  config.check();
  if ((lambdas.array() < 0).any()) throw Error("train_round: lambdas must be >= 0");
  if (!X.allFinite() || !y.allFinite()) throw Error("train_round: data contains NaN or infinity");

  GroveModel m = model;
  Vec theta = flatten(m);
  Optimizer opt(config.optimizer, config.learning_rate, theta.size());
  Rng shuffle_rng(config.seed + 0x51ed270b * static_cast<std::uint64_t>(round_index + 1));

  const Eigen::Index n = X.rows();
  const Eigen::Index bs = config.batch_size == 0 ? n : std::min<Eigen::Index>(config.batch_size, n);

  std::vector<Eigen::Index> perm(n);
  std::iota(perm.begin(), perm.end(), 0);

  for (int epoch = 0; epoch < config.epochs_per_round; ++epoch) {
    if (bs < n) {  // Fisher-Yates, pinned to the rng rather than std::shuffle
      for (Eigen::Index i = n - 1; i > 0; --i)
        std::swap(perm[i], perm[shuffle_rng.integer(static_cast<std::uint64_t>(i + 1))]);
    }
    for (Eigen::Index start = 0; start < n; start += bs) {
      Eigen::Index len = std::min(bs, n - start);
      Mat Xb(len, X.cols());
      Vec yb(len);
      if (bs < n) {
        for (Eigen::Index i = 0; i < len; ++i) {
          Xb.row(i) = X.row(perm[start + i]);
          yb(i) = y(perm[start + i]);
        }
      } else {
        Xb = X;
        yb = y;
      }
      auto [value, grad] =
          objective(m, Xb, yb, schema, spec, grid, lambdas, config.epsilon, config.positive_weight);
      if (!std::isfinite(value))
        throw TrainError("training diverged (non-finite objective) at epoch " +
                         std::to_string(epoch) + " of round " + std::to_string(round_index));
      opt.step(theta, grad);
      set_params(m, theta);
    }
  }
  return m;
}

std::string trace_to_csv(const TrainTrace& trace) {
  std::string out = "round,lambda1,lambda2,lambda3,loss,h1,h2,h3,metric,auc\n";
  for (const RoundRecord& r : trace.rounds) {
    out += std::to_string(r.round);
    for (double v : {r.lambda1, r.lambda2, r.lambda3, r.loss, r.h1, r.h2, r.h3, r.metric, r.auc})
      out += "," + fmt_double(v);
    out += "\n";
  }
  return out;
}

FitResult fit(ConstRefMat& X, ConstRefVec& y, const FeatureSchema& schema,
              const MonotoneSpec& spec, const GroveArchitecture& arch, Task task,
              const TrainConfig& config) {
  config.check();
  spec.check(schema);
  {
    auto violations = validate(schema, spec, arch);
    if (!violations.empty())
      throw SchemaError("fit: architecture cannot carry the constraints: " +
                        violations.front().message);
  }
  if (!X.allFinite() || !y.allFinite()) throw Error("fit: data contains NaN or infinity");

  PenaltyGrid grid = build_penalty_grid(schema, arch, config.grid);

  Rng init_rng(config.seed);
  FitResult out;
  out.model = random_grove(arch, task, init_rng, config.init_scale);

  Eigen::Vector3d lambdas = Eigen::Vector3d::Zero();
  for (int round = 1; round <= config.max_rounds; ++round) {
    if (!config.warm_start && round > 1) {
      Rng round_rng(config.seed + static_cast<std::uint64_t>(round));
      out.model = random_grove(arch, task, round_rng, config.init_scale);
    }
    out.model = train_round(out.model, X, y, schema, spec, grid, lambdas, config, round - 1);

    PenaltyReport rep = penalty_report(out.model, schema, spec, grid, 0.0);
    RoundRecord rec;
    rec.round = round;
    rec.lambda1 = lambdas(0);
    rec.lambda2 = lambdas(1);
    rec.lambda3 = lambdas(2);
    rec.loss = loss_on(out.model, X, y, config.positive_weight).first;
    rec.h1 = rep.h1;
    rec.h2 = rep.h2;
    rec.h3 = rep.h3;
    MetricSet ms = evaluate_model(out.model, X, y);
    if (task == Task::Regression) {
      rec.metric = ms.mse.value_or(0.0);
    } else {
      rec.metric = ms.classification_error;
      rec.auc = ms.auc;
    }
    out.trace.rounds.push_back(rec);

    if (rep.clean()) {
      out.certified = true;
      break;
    }
    if (round == config.max_rounds) break;
    const double hs[3] = {rep.h1, rep.h2, rep.h3};
    for (int i = 0; i < 3; ++i)
      if (hs[i] > 0) lambdas(i) = std::max(config.lambda_init, lambdas(i) * config.lambda_factor);
  }
  out.final_lambdas = lambdas;
  center_contributions(out.model, schema);
  return out;
}

}  // namespace monogrove
