#include "monogrove/separability.hpp"

#include <algorithm>

#include <json.hpp>

#include "monogrove/metrics.hpp"

namespace monogrove {

namespace {

// Constraints the penalty terms can enforce on this architecture; the full
// set is still used for post-fit certification.
MonotoneSpec enforceable_subset(const FeatureSchema& schema, const MonotoneSpec& spec,
                                const GroveArchitecture& arch) {
  MonotoneSpec out;
  out.individual = spec.individual;
  auto singleton = [&](int f) {
    int g = arch.group_of(f);
    return g >= 0 && arch.groups[g].features.size() == 1;
  };
  for (const auto& pr : spec.weak_pairs) {
    int a = schema.require(pr.first), b = schema.require(pr.second);
    if (arch.group_of(a) == arch.group_of(b) || (singleton(a) && singleton(b)))
      out.weak_pairs.push_back(pr);
  }
  for (const auto& pr : spec.strong_pairs) {
    int a = schema.require(pr.first), b = schema.require(pr.second);
    bool both_binary = schema.features[a].kind == FeatureKind::Binary &&
                       schema.features[b].kind == FeatureKind::Binary;
    if (arch.group_of(a) == arch.group_of(b) ||
        (singleton(a) && singleton(b) && both_binary))
      out.strong_pairs.push_back(pr);
  }
  return out;
}

GroveArchitecture arch_from_parts(std::vector<std::vector<int>> parts,
                                  const std::vector<int>& hidden) {
  GroveArchitecture arch;
  for (auto& p : parts) {
    if (p.empty()) continue;
    std::sort(p.begin(), p.end());
    Group g;
    g.features = std::move(p);
    g.hidden = hidden;
    arch.groups.push_back(std::move(g));
  }
  std::sort(arch.groups.begin(), arch.groups.end(),
            [](const Group& a, const Group& b) { return a.features.front() < b.features.front(); });
  return arch;
}

double accuracy(const GroveModel& m, ConstRefMat& X, ConstRefVec& y) {
  MetricSet ms = evaluate_model(m, X, y);
  return m.task == Task::Regression ? -ms.mse.value_or(0.0) : 1.0 - ms.classification_error;
}

}  // namespace

std::string verdict_to_json(const SeparabilityVerdict& v) {
  nlohmann::json j;
  j["acc_joint"] = v.acc_joint;
  j["acc_separated"] = v.acc_separated;
  j["threshold_eps"] = v.threshold_eps;
  j["separable"] = v.separable;
  j["monotone_feasible"] = v.monotone_feasible;
  return j.dump(2) + "\n";
}

SeparabilityVerdict test_separability(ConstRefMat& X, ConstRefVec& y, Task task,
                                      const FeatureSchema& schema, const MonotoneSpec& spec,
                                      const std::vector<int>& group_u,
                                      const std::vector<int>& group_v,
                                      const SeparabilityConfig& config) {
  if (!(config.threshold_eps > 0)) throw Error("separability: threshold_eps must be > 0");
  spec.check(schema);
  {
    std::vector<char> seen(schema.size(), 0);
    for (int f : group_u) {
      if (f < 0 || f >= schema.size() || seen[f]++) throw SchemaError("U/V is not a partition");
    }
    for (int f : group_v) {
      if (f < 0 || f >= schema.size() || seen[f]++) throw SchemaError("U/V is not a partition");
    }
    for (int f = 0; f < schema.size(); ++f)
      if (!seen[f]) throw SchemaError("U/V is not a partition: feature " +
                                      schema.features[f].name + " unassigned");
  }

  std::vector<int> all;
  for (int f = 0; f < schema.size(); ++f) all.push_back(f);
  const std::vector<int>& hidden = config.hidden;

  GroveArchitecture joint_arch = arch_from_parts({all}, hidden);
  GroveArchitecture sep_arch = arch_from_parts({group_u, group_v}, hidden);

  FitResult joint = fit(X, y, schema, enforceable_subset(schema, spec, joint_arch), joint_arch,
                        task, config.train);
  CertificationReport joint_cert = certify(joint.model, schema, spec, config.cert);

  SeparabilityVerdict v;
  v.threshold_eps = config.threshold_eps;
  v.acc_joint = accuracy(joint.model, X, y);

  bool degenerate = group_u.empty() || group_v.empty();
  if (degenerate) {
    v.acc_separated = v.acc_joint;
    v.monotone_feasible = joint_cert.all_pass() && joint_cert.structural.empty();
    v.separable = v.monotone_feasible;  // zero gap
    return v;
  }

  FitResult sep =
      fit(X, y, schema, enforceable_subset(schema, spec, sep_arch), sep_arch, task, config.train);
  CertificationReport sep_cert = certify(sep.model, schema, spec, config.cert);
  v.acc_separated = accuracy(sep.model, X, y);

  v.monotone_feasible =
      joint_cert.all_pass() && sep_cert.all_pass() && sep_cert.structural.empty();
  v.separable =
      std::abs(v.acc_joint - v.acc_separated) < config.threshold_eps && v.monotone_feasible;
  return v;
}

}  // namespace monogrove
