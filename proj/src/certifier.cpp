#include "monogrove/certifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace monogrove {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec audit_axis(const Feature& f, int points) {
  if (f.kind == FeatureKind::Binary) return feature_axis(f, 2);
  if (f.kind == FeatureKind::Count) {
    int n_int = static_cast<int>(std::floor(f.hi) - std::ceil(f.lo)) + 1;
    return dense_axis(f, std::max(2, 4 * n_int + 1));
  }
  return dense_axis(f, points);
}

std::vector<Vec> audit_axes_for_group(const FeatureSchema& schema, const Group& g,
                                      const CertifyOptions& opts) {
  std::vector<Vec> axes;
  int points = g.features.size() == 1 ? opts.points_1d : opts.points_group;
  for (int f : g.features) axes.push_back(audit_axis(schema.features.at(f), points));
  return axes;
}

void guard_lattice(const std::vector<Vec>& axes, const CertifyOptions& opts) {
  if (lattice_size(axes) > opts.max_lattice_points)
    throw Error("audit lattice too large (" + std::to_string(lattice_size(axes)) +
                " points); reduce the grid density or group size");
}

struct MarginTracker {
  double min_margin = kInf;
  Vec worst, worst_b;

  void offer(double margin, const Vec& point) {
    if (margin < min_margin) {
      min_margin = margin;
      worst = point;
      worst_b = Vec();
    }
  }
  void offer(double margin, const Vec& lhs, const Vec& rhs) {
    if (margin < min_margin) {
      min_margin = margin;
      worst = lhs;
      worst_b = rhs;
    }
  }

  void into(ConstraintResult& r) const {
    r.min_margin = min_margin == kInf ? 0.0 : min_margin;
    r.pass = r.min_margin >= 0.0;
    if (!r.pass) {
      r.witness_point = worst;
      r.witness_point_b = worst_b;
    }
  }
};

std::vector<std::string> feature_names(const FeatureSchema& schema, const std::vector<int>& idx) {
  std::vector<std::string> out;
  for (int i : idx) out.push_back(schema.features.at(i).name);
  return out;
}

// ------------------------------------------------------------------
// derivative-based certification
// ------------------------------------------------------------------

ConstraintResult derivative_individual(const GroveModel& m, const FeatureSchema& schema,
                                       const std::string& name, const CertifyOptions& opts) {
  ConstraintResult r;
  r.kind = "individual";
  r.features = {name};
  int f = schema.require(name);
  int g = m.arch.group_of(f);
  if (g < 0) throw SchemaError("certify: feature " + name + " is not covered by the model");
  int pos = m.arch.groups[g].position_of(f);
  auto axes = audit_axes_for_group(schema, m.arch.groups[g], opts);
  guard_lattice(axes, opts);
  MarginTracker t;
  for_each_lattice(axes, [&](const Vec& point) {
    EvalRecord rec = eval_full(m.subnets[g], point);
    t.offer(rec.input_grad(pos), point);
  });
  r.point_features = feature_names(schema, m.arch.groups[g].features);
  t.into(r);
  return r;
}

ConstraintResult derivative_pair(const GroveModel& m, const FeatureSchema& schema,
                                 const std::string& dom, const std::string& sub, bool strong,
                                 const CertifyOptions& opts) {
  ConstraintResult r;
  r.kind = strong ? "strong" : "weak";
  r.features = {dom, sub};
  int fa = schema.require(dom), fb = schema.require(sub);
  int ga = m.arch.group_of(fa), gb = m.arch.group_of(fb);
  if (ga < 0 || gb < 0) throw SchemaError("certify: pair references uncovered features");
  MarginTracker t;

  if (ga == gb) {
    const Group& grp = m.arch.groups[ga];
    int pa = grp.position_of(fa), pb = grp.position_of(fb);
    auto axes = audit_axes_for_group(schema, grp, opts);
    if (!strong) {
      // tied diagonal x_dom = x_sub
      double lo = std::max(schema.features[fa].lo, schema.features[fb].lo);
      double hi = std::min(schema.features[fa].hi, schema.features[fb].hi);
      if (!(lo <= hi)) throw Error("certify: tied pair has disjoint domains");
      Feature joint = schema.features[fa];
      joint.lo = lo;
      joint.hi = hi;
      axes[pa] = audit_axis(joint, static_cast<int>(axes[pa].size()));
      axes[pb] = Vec::Zero(1);
      guard_lattice(axes, opts);
      for_each_lattice(axes, [&](const Vec& raw) {
        Vec point = raw;
        point(pb) = point(pa);
        EvalRecord rec = eval_full(m.subnets[ga], point);
        t.offer(rec.input_grad(pa) - rec.input_grad(pb), point);
      });
    } else {
      guard_lattice(axes, opts);
      for_each_lattice(axes, [&](const Vec& point) {
        EvalRecord rec = eval_full(m.subnets[ga], point);
        t.offer(rec.input_grad(pa) - rec.input_grad(pb), point);
      });
    }
    r.point_features = feature_names(schema, grp.features);
    t.into(r);
    return r;
  }

  bool singles = m.arch.groups[ga].features.size() == 1 && m.arch.groups[gb].features.size() == 1;
  if (!singles)
    throw SchemaError("certify: pair (" + dom + ", " + sub +
                      ") spans a multi-feature group it does not live in");
  bool both_binary = schema.features[fa].kind == FeatureKind::Binary &&
                     schema.features[fb].kind == FeatureKind::Binary;

  if (!strong || both_binary) {
    // shared diagonal, compare subnet slopes at equal inputs
    double lo = std::max(schema.features[fa].lo, schema.features[fb].lo);
    double hi = std::min(schema.features[fa].hi, schema.features[fb].hi);
    if (!(lo <= hi)) throw Error("certify: tied pair has disjoint domains");
    Feature joint = schema.features[fa];
    joint.lo = lo;
    joint.hi = hi;
    Vec axis = audit_axis(joint, opts.points_1d);
    Vec xa(1);
    for (Eigen::Index i = 0; i < axis.size(); ++i) {
      xa(0) = axis(i);
      double da = eval_full(m.subnets[ga], xa).input_grad(0);
      double db = eval_full(m.subnets[gb], xa).input_grad(0);
      Vec point(2);
      point << axis(i), axis(i);
      t.offer(da - db, point);
    }
  } else {
    // additive form: increments of dom must dominate increments of sub at any
    // pair of base points, so the slope ranges must not overlap the wrong way
    Vec axis_a = audit_axis(schema.features[fa], opts.points_1d);
    Vec axis_b = audit_axis(schema.features[fb], opts.points_1d);
    double min_da = kInf, max_db = -kInf;
    double arg_a = axis_a(0), arg_b = axis_b(0);
    Vec x(1);
    for (Eigen::Index i = 0; i < axis_a.size(); ++i) {
      x(0) = axis_a(i);
      double d = eval_full(m.subnets[ga], x).input_grad(0);
      if (d < min_da) {
        min_da = d;
        arg_a = axis_a(i);
      }
    }
    for (Eigen::Index i = 0; i < axis_b.size(); ++i) {
      x(0) = axis_b(i);
      double d = eval_full(m.subnets[gb], x).input_grad(0);
      if (d > max_db) {
        max_db = d;
        arg_b = axis_b(i);
      }
    }
    Vec point(2);
    point << arg_a, arg_b;
    t.offer(min_da - max_db, point);
  }
  r.point_features = {dom, sub};
  t.into(r);
  return r;
}

// ------------------------------------------------------------------
// value-level brute force
// ------------------------------------------------------------------

std::vector<Vec> integer_axes(const FeatureSchema& schema, const std::vector<int>& feats) {
  std::vector<Vec> axes;
  for (int f : feats) {
    const Feature& ft = schema.features.at(f);
    if (ft.kind == FeatureKind::Continuous)
      throw Error("certify_discrete: feature " + ft.name + " is continuous");
    axes.push_back(feature_axis(ft, 2));
  }
  return axes;
}

struct ComparisonBudget {
  std::size_t used = 0, limit;
  explicit ComparisonBudget(std::size_t lim) : limit(lim) {}
  void spend() {
    if (++used > limit)
      throw Error("certify_discrete: domain too large (over " + std::to_string(limit) +
                  " comparisons)");
  }
};

// Individual: f(p) <= f(p + c e_alpha) for every admissible c >= 1.
ConstraintResult discrete_individual(const ValueFn& f, const FeatureSchema& schema,
                                     const std::vector<int>& feats, int pos,
                                     const std::string& name, ComparisonBudget& budget) {
  ConstraintResult r;
  r.kind = "individual";
  r.features = {name};
  r.point_features = feature_names(schema, feats);
  auto axes = integer_axes(schema, feats);
  double hi = axes[pos](axes[pos].size() - 1);
  MarginTracker t;
  for_each_lattice(axes, [&](const Vec& p) {
    double base = f(p);
    Vec q = p;
    for (double c = 1; p(pos) + c <= hi; ++c) {
      budget.spend();
      q(pos) = p(pos) + c;
      t.offer(f(q) - base, p, q);
    }
  });
  t.into(r);
  return r;
}

// Pairwise: f(.., y, z + c, ..) <= f(.., y + c, z, ..); weak restricts base
// points to y = z.
ConstraintResult discrete_pair(const ValueFn& f, const FeatureSchema& schema,
                               const std::vector<int>& feats, int py, int pz,
                               const std::string& dom, const std::string& sub, bool strong,
                               ComparisonBudget& budget) {
  ConstraintResult r;
  r.kind = strong ? "strong" : "weak";
  r.features = {dom, sub};
  r.point_features = feature_names(schema, feats);
  auto axes = integer_axes(schema, feats);
  double hi_y = axes[py](axes[py].size() - 1);
  double hi_z = axes[pz](axes[pz].size() - 1);
  MarginTracker t;
  for_each_lattice(axes, [&](const Vec& p) {
    if (!strong && p(py) != p(pz)) return;
    Vec on_z = p, on_y = p;
    for (double c = 1; p(py) + c <= hi_y && p(pz) + c <= hi_z; ++c) {
      budget.spend();
      on_z(pz) = p(pz) + c;  // increment lands on the dominated feature
      on_y(py) = p(py) + c;  // increment lands on the dominant feature
      t.offer(f(on_y) - f(on_z), on_z, on_y);
    }
  });
  t.into(r);
  return r;
}

ValueFn subnet_fn(const GroveModel& m, int group) {
  return [&m, group](const Vec& x) { return eval(m.subnets[group], x); };
}

}  // namespace

bool CertificationReport::all_pass() const {
  for (const ConstraintResult& c : constraints)
    if (!c.pass) return false;
  return true;
}

const ConstraintResult* CertificationReport::find(const std::string& kind,
                                                  const std::vector<std::string>& features) const {
  for (const ConstraintResult& c : constraints)
    if (c.kind == kind && c.features == features) return &c;
  return nullptr;
}

CertificationReport certify(const GroveModel& m, const FeatureSchema& schema,
                            const MonotoneSpec& spec, const CertifyOptions& opts) {
  spec.check(schema);
  m.check();
  CertificationReport rep;
  for (const std::string& name : spec.individual)
    rep.constraints.push_back(derivative_individual(m, schema, name, opts));
  for (const auto& pr : spec.weak_pairs)
    rep.constraints.push_back(derivative_pair(m, schema, pr.first, pr.second, false, opts));
  for (const auto& pr : transitive_closure_strong(spec))
    rep.constraints.push_back(derivative_pair(m, schema, pr.first, pr.second, true, opts));

  for (int f = 0; f < schema.size(); ++f) {
    const Feature& ft = schema.features[f];
    if (ft.kind == FeatureKind::Binary) continue;
    rep.dme.push_back(detect_dme(m, schema, f, opts));
  }
  rep.structural = structural_guard(schema, spec, m.arch, rep, opts.slope_floor);
  return rep;
}

CertificationReport certify_discrete(const GroveModel& m, const FeatureSchema& schema,
                                     const MonotoneSpec& spec, std::size_t max_comparisons) {
  spec.check(schema);
  m.check();
  ComparisonBudget budget(max_comparisons);
  CertificationReport rep;

  for (const std::string& name : spec.individual) {
    int f = schema.require(name);
    int g = m.arch.group_of(f);
    if (g < 0) throw SchemaError("certify_discrete: feature " + name + " is uncovered");
    const auto& feats = m.arch.groups[g].features;
    rep.constraints.push_back(discrete_individual(
        subnet_fn(m, g), schema, feats, m.arch.groups[g].position_of(f), name, budget));
  }

  auto pair_check = [&](const std::string& dom, const std::string& sub, bool strong) {
    int fa = schema.require(dom), fb = schema.require(sub);
    int ga = m.arch.group_of(fa), gb = m.arch.group_of(fb);
    if (ga < 0 || gb < 0) throw SchemaError("certify_discrete: pair references uncovered features");
    if (ga == gb) {
      const auto& feats = m.arch.groups[ga].features;
      rep.constraints.push_back(discrete_pair(subnet_fn(m, ga), schema, feats,
                                              m.arch.groups[ga].position_of(fa),
                                              m.arch.groups[ga].position_of(fb), dom, sub, strong,
                                              budget));
      return;
    }
    if (m.arch.groups[ga].features.size() != 1 || m.arch.groups[gb].features.size() != 1)
      throw SchemaError("certify_discrete: pair (" + dom + ", " + sub +
                        ") spans a multi-feature group it does not live in");
    // additive: only the two singleton subnets matter for the swap difference
    const GroveModel* pm = &m;
    int iga = ga, igb = gb;
    ValueFn f2 = [pm, iga, igb](const Vec& x) {
      Vec xa(1), xb(1);
      xa(0) = x(0);
      xb(0) = x(1);
      return eval(pm->subnets[iga], xa) + eval(pm->subnets[igb], xb);
    };
    rep.constraints.push_back(
        discrete_pair(f2, schema, {fa, fb}, 0, 1, dom, sub, strong, budget));
  };

  for (const auto& pr : spec.weak_pairs) pair_check(pr.first, pr.second, false);
  for (const auto& pr : transitive_closure_strong(spec)) pair_check(pr.first, pr.second, true);
  return rep;
}

CertificationReport certify_discrete_fn(const ValueFn& f, const FeatureSchema& schema,
                                        const MonotoneSpec& spec, std::size_t max_comparisons) {
  spec.check(schema);
  ComparisonBudget budget(max_comparisons);
  std::vector<int> all(schema.size());
  for (int i = 0; i < schema.size(); ++i) all[i] = i;

  CertificationReport rep;
  for (const std::string& name : spec.individual)
    rep.constraints.push_back(
        discrete_individual(f, schema, all, schema.require(name), name, budget));
  for (const auto& pr : spec.weak_pairs)
    rep.constraints.push_back(discrete_pair(f, schema, all, schema.require(pr.first),
                                            schema.require(pr.second), pr.first, pr.second, false,
                                            budget));
  for (const auto& pr : transitive_closure_strong(spec))
    rep.constraints.push_back(discrete_pair(f, schema, all, schema.require(pr.first),
                                            schema.require(pr.second), pr.first, pr.second, true,
                                            budget));
  return rep;
}

DmeFinding detect_dme_values(const Vec& grid, const Vec& contributions, double tail_threshold) {
  if (grid.size() < 3 || grid.size() != contributions.size())
    throw Error("detect_dme: need at least 3 grid points");
  DmeFinding out;
  out.grid = grid;
  out.first_differences = contributions.tail(contributions.size() - 1) -
                          contributions.head(contributions.size() - 1);
  const Vec& d = out.first_differences;
  out.increasing = (d.array() > 0).all();
  out.diminishing = true;
  for (Eigen::Index i = 0; i + 1 < d.size(); ++i)
    if (!(d(i + 1) < d(i))) out.diminishing = false;
  out.tail_vanishes = out.increasing && d(d.size() - 1) < tail_threshold * d(0);
  out.is_dme = out.increasing && out.diminishing && out.tail_vanishes;
  return out;
}

DmeFinding detect_dme(const GroveModel& m, const FeatureSchema& schema, int feature,
                      const CertifyOptions& opts) {
  const Feature& ft = schema.features.at(feature);
  if (ft.kind == FeatureKind::Binary) throw Error("detect_dme: degenerate grid for " + ft.name);
  int g = m.arch.group_of(feature);
  if (g < 0) throw SchemaError("detect_dme: feature is uncovered");
  const Group& grp = m.arch.groups[g];
  int pos = grp.position_of(feature);
  Vec grid = dense_axis(ft, std::max(3, opts.dme_points));

  Vec x(grp.features.size());
  for (std::size_t i = 0; i < grp.features.size(); ++i)
    x(i) = schema.features[grp.features[i]].lo;
  Vec vals(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    x(pos) = grid(i);
    vals(i) = eval(m.subnets[g], x);
  }
  DmeFinding out = detect_dme_values(grid, vals, opts.dme_tail_threshold);
  out.feature = ft.name;
  return out;
}

std::vector<StructuralHazard> structural_guard(const FeatureSchema& schema, const MonotoneSpec& spec,
                                            const GroveArchitecture& arch,
                                            const CertificationReport& certify_output,
                                            double slope_floor) {
  std::vector<StructuralHazard> out;
  for (const auto& pr : transitive_closure_strong(spec)) {
    int y = schema.require(pr.first), z = schema.require(pr.second);
    if (schema.features[y].kind == FeatureKind::Binary &&
        schema.features[z].kind == FeatureKind::Binary)
      continue;
    if (arch.group_of(y) == arch.group_of(z)) continue;
    const ConstraintResult* indiv = certify_output.find("individual", {pr.first});
    if (!indiv) continue;
    if (indiv->min_margin < slope_floor) {
      StructuralHazard h;
      h.dominant = pr.first;
      h.dominated = pr.second;
      h.min_slope = indiv->min_margin;
      h.note = "additive separation with a vanishing dominant slope forces " + pr.second +
               "'s subnet constant";
      out.push_back(std::move(h));
    }
  }
  return out;
}

namespace {

nlohmann::json vec_to_json(const Vec& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

std::string report_to_json(const CertificationReport& rep) {
  nlohmann::json j;
  j["pass"] = rep.all_pass();
  nlohmann::json cs = nlohmann::json::array();
  for (const ConstraintResult& c : rep.constraints) {
    nlohmann::json jc;
    jc["kind"] = c.kind;
    jc["features"] = c.features;
    jc["pass"] = c.pass;
    jc["min_margin"] = c.min_margin;
    if (!c.pass) {
      jc["witness_point"] = vec_to_json(c.witness_point);
      if (c.witness_point_b.size() > 0) jc["witness_point_b"] = vec_to_json(c.witness_point_b);
      jc["point_features"] = c.point_features;
    }
    cs.push_back(jc);
  }
  j["constraints"] = cs;
  nlohmann::json ds = nlohmann::json::array();
  for (const DmeFinding& d : rep.dme) {
    ds.push_back({{"feature", d.feature},
                  {"is_dme", d.is_dme},
                  {"increasing", d.increasing},
                  {"diminishing", d.diminishing},
                  {"tail_vanishes", d.tail_vanishes},
                  {"first_differences", vec_to_json(d.first_differences)}});
  }
  j["dme_findings"] = ds;
  nlohmann::json hs = nlohmann::json::array();
  for (const StructuralHazard& h : rep.structural)
    hs.push_back({{"dominant", h.dominant},
                  {"dominated", h.dominated},
                  {"min_slope", h.min_slope},
                  {"note", h.note}});
  j["structural_hazards"] = hs;
  return j.dump(2) + "\n";
}

std::string report_summary(const CertificationReport& rep) {
  std::ostringstream out;
  for (const ConstraintResult& c : rep.constraints) {
    out << (c.pass ? "PASS " : "FAIL ") << c.kind << " [";
    for (std::size_t i = 0; i < c.features.size(); ++i)
      out << (i ? ", " : "") << c.features[i];
    out << "] min_margin=" << c.min_margin;
    if (!c.pass && c.witness_point.size() > 0) {
      out << " witness=(";
      for (Eigen::Index i = 0; i < c.witness_point.size(); ++i)
        out << (i ? ", " : "") << c.witness_point(i);
      out << ")";
      if (c.witness_point_b.size() > 0) {
        out << " vs (";
        for (Eigen::Index i = 0; i < c.witness_point_b.size(); ++i)
          out << (i ? ", " : "") << c.witness_point_b(i);
        out << ")";
      }
    }
    out << "\n";
  }
  for (const StructuralHazard& h : rep.structural)
    out << "HAZARD strong pair (" << h.dominant << " over " << h.dominated
        << ") split across groups with min slope " << h.min_slope << "\n";
  out << (rep.all_pass() ? "certification: PASS" : "certification: FAIL") << "\n";
  return out.str();
}

}  // namespace monogrove
