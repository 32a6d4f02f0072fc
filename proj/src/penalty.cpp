#include "monogrove/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace monogrove {

PenaltyGrid build_penalty_grid(const FeatureSchema& schema, const GroveArchitecture& arch,
                               const GridOptions& opts) {
  PenaltyGrid grid;
  for (const Group& g : arch.groups) {
    std::vector<Vec> axes;
    int points = g.features.size() == 1 ? opts.points_1d : opts.points_group;
    for (int f : g.features) axes.push_back(feature_axis(schema.features.at(f), points));
    grid.group_axes.push_back(std::move(axes));
  }
  return grid;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// hinge(s) = eps + max(0, s); the penalty term is hinge^2. The floor keeps
// the gradient magnitude at least 2*eps while any violation remains.
struct ConstraintAccum {
  double eps;
  Eigen::Index n_params;
  double term_sum = 0.0;
  std::size_t points = 0;
  double min_margin = kInf;
  Vec worst;
  Vec grad;

  ConstraintAccum(double e, Eigen::Index np) : eps(e), n_params(np), grad(Vec::Zero(np)) {}

  // ds_dtheta entries are (global offset, per-subnet row) pairs.
  void add(double s, const Vec& point,
           const std::vector<std::pair<int, Vec>>& ds_dtheta) {
    ++points;
    double hinge = eps + std::max(0.0, s);
    term_sum += hinge * hinge;
    if (s > 0.0) {
      double c = 2.0 * hinge;
      for (const auto& [off, row] : ds_dtheta) grad.segment(off, row.size()) += c * row;
    }
    if (-s < min_margin) {
      min_margin = -s;
      worst = point;
    }
  }

  void finish(double& value_out, Vec& grad_out) const {
    if (points == 0) throw Error("penalty constraint evaluated on an empty grid");
    value_out = term_sum / static_cast<double>(points);
    grad_out = grad / static_cast<double>(points);
  }
};

// Tied axis for a pair of features sharing one coordinate value.
Vec tied_axis(const Feature& a, const Feature& b, int fallback_points) {
  double lo = std::max(a.lo, b.lo), hi = std::min(a.hi, b.hi);
  if (!(lo < hi) && !(lo == hi))
    throw Error("features " + a.name + " and " + b.name + " have disjoint domains");
  bool ints = (a.kind != FeatureKind::Continuous) && (b.kind != FeatureKind::Continuous);
  Feature joint;
  joint.name = a.name + "=" + b.name;
  joint.kind = ints ? FeatureKind::Count : FeatureKind::Continuous;
  joint.lo = lo;
  joint.hi = hi;
  return feature_axis(joint, fallback_points);
}

struct PairSite {
  bool co_grouped = false;
  int group_a = -1, pos_a = -1;  // dominant
  int group_b = -1, pos_b = -1;  // dominated
};

PairSite resolve_pair(const FeatureSchema& schema, const GroveArchitecture& arch,
                      const std::string& dom, const std::string& sub, bool strong) {
  int fa = schema.require(dom), fb = schema.require(sub);
  PairSite site;
  site.group_a = arch.group_of(fa);
  site.group_b = arch.group_of(fb);
  if (site.group_a < 0 || site.group_b < 0)
    throw SchemaError("pair (" + dom + ", " + sub + ") references ungrouped features");
  site.pos_a = arch.groups[site.group_a].position_of(fa);
  site.pos_b = arch.groups[site.group_b].position_of(fb);
  site.co_grouped = site.group_a == site.group_b;
  if (site.co_grouped) return site;

  bool a_single = arch.groups[site.group_a].features.size() == 1;
  bool b_single = arch.groups[site.group_b].features.size() == 1;
  if (strong) {
    bool both_binary = schema.features[fa].kind == FeatureKind::Binary &&
                       schema.features[fb].kind == FeatureKind::Binary;
    if (!(a_single && b_single && both_binary))
      throw SchemaError("strong pair (" + dom + ", " + sub +
                        ") is neither co-grouped nor a pair of binary singletons");
  } else {
    if (!(a_single && b_single))
      throw SchemaError("weak pair (" + dom + ", " + sub +
                        ") spans a multi-feature group; co-group it or keep both singleton");
  }
  return site;
}

// s evaluated over the group lattice as coef_a * grad[pos_a] + coef_b * grad[pos_b]
// (pos_b < 0 means the single-position case).
ConstraintCheck scan_group(const GroveModel& m, int group, const std::vector<Vec>& axes,
                           int pos_a, double coef_a, int pos_b, double coef_b,
                           ConstraintAccum& acc) {
  const Group& grp = m.arch.groups[group];
  const int off = group_param_offset(m, group);
  for_each_lattice(axes, [&](const Vec& point) {
    EvalRecord r = eval_full(m.subnets[group], point);
    double s = coef_a * r.input_grad(pos_a);
    Vec row = coef_a * r.input_grad_param_jac.row(pos_a);
    if (pos_b >= 0) {
      s += coef_b * r.input_grad(pos_b);
      row += coef_b * r.input_grad_param_jac.row(pos_b);
    }
    acc.add(s, point, {{off, row}});
  });
  ConstraintCheck check;
  check.min_margin = acc.min_margin;
  check.worst_point = acc.worst;
  for (int f : grp.features) check.worst_point_features.push_back(f);
  return check;
}

// Tied diagonal inside one group: coordinate pos_b mirrors pos_a.
ConstraintCheck scan_group_tied(const GroveModel& m, const FeatureSchema& schema, int group,
                                std::vector<Vec> axes, int pos_a, int pos_b,
                                ConstraintAccum& acc, int fallback_points) {
  const Group& grp = m.arch.groups[group];
  const Feature& fa = schema.features[grp.features[pos_a]];
  const Feature& fb = schema.features[grp.features[pos_b]];
  axes[pos_a] = tied_axis(fa, fb, fallback_points);
  axes[pos_b] = Vec::Zero(1);  // placeholder; mirrored below
  const int off = group_param_offset(m, group);
  for_each_lattice(axes, [&](const Vec& raw) {
    Vec point = raw;
    point(pos_b) = point(pos_a);
    EvalRecord r = eval_full(m.subnets[group], point);
    double s = -r.input_grad(pos_a) + r.input_grad(pos_b);
    Vec row = (-r.input_grad_param_jac.row(pos_a) + r.input_grad_param_jac.row(pos_b));
    acc.add(s, point, {{off, row}});
  });
  ConstraintCheck check;
  check.min_margin = acc.min_margin;
  check.worst_point = acc.worst;
  for (int f : grp.features) check.worst_point_features.push_back(f);
  return check;
}

// Two singleton subnets compared on a shared 1-D axis.
ConstraintCheck scan_cross_singleton(const GroveModel& m, const PairSite& site, const Vec& axis,
                                     ConstraintAccum& acc) {
  const int fa = m.arch.groups[site.group_a].features[0];
  const int fb = m.arch.groups[site.group_b].features[0];
  const int off_a = group_param_offset(m, site.group_a);
  const int off_b = group_param_offset(m, site.group_b);
  Vec xa(1), xb(1);
  for (Eigen::Index i = 0; i < axis.size(); ++i) {
    xa(0) = xb(0) = axis(i);
    EvalRecord ra = eval_full(m.subnets[site.group_a], xa);
    EvalRecord rb = eval_full(m.subnets[site.group_b], xb);
    double s = -ra.input_grad(0) + rb.input_grad(0);
    Vec row_a = -ra.input_grad_param_jac.row(0);
    Vec row_b = rb.input_grad_param_jac.row(0);
    Vec point(2);
    point << axis(i), axis(i);
    acc.add(s, point, {{off_a, row_a}, {off_b, row_b}});
  }
  ConstraintCheck check;
  check.min_margin = acc.min_margin;
  check.worst_point = acc.worst;
  check.worst_point_features = {fa, fb};
  return check;
}

PenaltyValue combine(std::vector<std::pair<double, Vec>> parts,
                     std::vector<ConstraintCheck> checks, Eigen::Index n_params) {
  PenaltyValue out;
  out.param_grad = Vec::Zero(n_params);
  out.constraints = std::move(checks);
  if (parts.empty()) return out;
  for (const auto& [v, g] : parts) {
    out.value += v;
    out.param_grad += g;
  }
  out.value /= static_cast<double>(parts.size());
  out.param_grad /= static_cast<double>(parts.size());
  return out;
}

}  // namespace

PenaltyValue h1(const GroveModel& m, const FeatureSchema& schema, const MonotoneSpec& spec,
                const PenaltyGrid& grid, double eps) {
  if (eps < 0) throw Error("h1: eps must be >= 0");
  const Eigen::Index P = num_params(m);
  std::vector<std::pair<double, Vec>> parts;
  std::vector<ConstraintCheck> checks;
  for (const std::string& name : spec.individual) {
    int f = schema.require(name);
    int g = m.arch.group_of(f);
    if (g < 0) throw SchemaError("h1: feature " + name + " is not covered by the architecture");
    int pos = m.arch.groups[g].position_of(f);
    ConstraintAccum acc(eps, P);
    ConstraintCheck check = scan_group(m, g, grid.group_axes.at(g), pos, -1.0, -1, 0.0, acc);
    check.kind = "individual";
    check.features = {name};
    double v;
    Vec gr;
    acc.finish(v, gr);
    parts.emplace_back(v, std::move(gr));
    checks.push_back(std::move(check));
  }
  return combine(std::move(parts), std::move(checks), P);
}

PenaltyValue h2(const GroveModel& m, const FeatureSchema& schema, const MonotoneSpec& spec,
                const PenaltyGrid& grid, double eps) {
  if (eps < 0) throw Error("h2: eps must be >= 0");
  const Eigen::Index P = num_params(m);
  std::vector<std::pair<double, Vec>> parts;
  std::vector<ConstraintCheck> checks;
  for (const auto& pr : spec.weak_pairs) {
    PairSite site = resolve_pair(schema, m.arch, pr.first, pr.second, /*strong=*/false);
    ConstraintAccum acc(eps, P);
    ConstraintCheck check;
    if (site.co_grouped) {
      const auto& axes = grid.group_axes.at(site.group_a);
      int fallback = static_cast<int>(axes.at(site.pos_a).size());
      check = scan_group_tied(m, schema, site.group_a, axes, site.pos_a, site.pos_b, acc,
                              fallback);
    } else {
      const Feature& fa = schema.features[m.arch.groups[site.group_a].features[0]];
      const Feature& fb = schema.features[m.arch.groups[site.group_b].features[0]];
      int fallback = static_cast<int>(std::max(grid.group_axes.at(site.group_a)[0].size(),
                                               grid.group_axes.at(site.group_b)[0].size()));
      check = scan_cross_singleton(m, site, tied_axis(fa, fb, fallback), acc);
    }
    check.kind = "weak";
    check.features = {pr.first, pr.second};
    double v;
    Vec gr;
    acc.finish(v, gr);
    parts.emplace_back(v, std::move(gr));
    checks.push_back(std::move(check));
  }
  return combine(std::move(parts), std::move(checks), P);
}

PenaltyValue h3(const GroveModel& m, const FeatureSchema& schema, const MonotoneSpec& spec,
                const PenaltyGrid& grid, double eps) {
  if (eps < 0) throw Error("h3: eps must be >= 0");
  const Eigen::Index P = num_params(m);
  std::vector<std::pair<double, Vec>> parts;
  std::vector<ConstraintCheck> checks;
  for (const auto& pr : transitive_closure_strong(spec)) {
    PairSite site = resolve_pair(schema, m.arch, pr.first, pr.second, /*strong=*/true);
    ConstraintAccum acc(eps, P);
    ConstraintCheck check;
    if (site.co_grouped) {
      // s = df/dx_z - df/dx_y over the full lattice
      check = scan_group(m, site.group_a, grid.group_axes.at(site.group_a), site.pos_b, 1.0,
                         site.pos_a, -1.0, acc);
    } else {
      // binary singletons: weak and strong coincide, compare on the diagonal
      const Feature& fa = schema.features[m.arch.groups[site.group_a].features[0]];
      const Feature& fb = schema.features[m.arch.groups[site.group_b].features[0]];
      check = scan_cross_singleton(m, site, tied_axis(fa, fb, 2), acc);
    }
    check.kind = "strong";
    check.features = {pr.first, pr.second};
    double v;
    Vec gr;
    acc.finish(v, gr);
    parts.emplace_back(v, std::move(gr));
    checks.push_back(std::move(check));
  }
  return combine(std::move(parts), std::move(checks), P);
}

PenaltyReport penalty_report(const GroveModel& m, const FeatureSchema& schema,
                             const MonotoneSpec& spec, const PenaltyGrid& grid, double eps) {
  PenaltyReport rep;
  rep.epsilon_used = eps;
  PenaltyValue v1 = h1(m, schema, spec, grid, eps);
  PenaltyValue v2 = h2(m, schema, spec, grid, eps);
  PenaltyValue v3 = h3(m, schema, spec, grid, eps);
  rep.h1 = v1.value;
  rep.h2 = v2.value;
  rep.h3 = v3.value;
  for (auto* pv : {&v1, &v2, &v3})
    for (ConstraintCheck& c : pv->constraints) rep.constraints.push_back(std::move(c));
  return rep;
}

}  // namespace monogrove
