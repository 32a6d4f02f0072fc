#include <doctest.h>

#include <cmath>

#include "monogrove/certifier.hpp"
#include "monogrove/trainer.hpp"
#include "test_util.hpp"

using namespace monogrove;
using namespace testutil;

namespace {

Feature count_feature(const std::string& name, int hi) {
  Feature f;
  f.name = name;
  f.kind = FeatureKind::Count;
  f.lo = 0;
  f.hi = hi;
  return f;
}

FeatureSchema pastdue_schema() {
  FeatureSchema s;
  s.features = {count_feature("x1", 2), count_feature("x2", 2), count_feature("x3", 2)};
  return s;
}

MonotoneSpec pastdue_spec() {
  MonotoneSpec sp;
  sp.individual = {"x1", "x2", "x3"};
  sp.strong_pairs = {{"x3", "x2"}, {"x2", "x1"}};
  return sp;
}

// Grouped delinquency surface with the severity order x3 over x2 over x1;
// every single-step comparison increases in the dominant direction.
double grouped_pastdue_table(const Vec& x) {
  static const double t[3][3][3] = {
      // [x3][x1][x2]
      {{0.0, 1.7, 2.3}, {1.7, 2.3, 2.8}, {2.3, 2.8, 3.2}},
      {{2.2, 2.7, 3.2}, {2.7, 3.1, 3.5}, {3.1, 3.5, 3.7}},
      {{3.1, 3.4, 3.7}, {3.4, 3.6, 3.8}, {3.6, 3.8, 3.9}}};
  return t[static_cast<int>(x(2))][static_cast<int>(x(0))][static_cast<int>(x(1))];
}

// Additive per-feature curves fitted without strong-pair constraints: weak
// and individual monotonicity hold, strong pairwise does not.
double additive_pastdue_table(const Vec& x) {
  static const double f1[3] = {0.0, 0.8, 1.0};
  static const double f2[3] = {0.0, 1.4, 1.7};
  static const double f3[3] = {0.0, 1.7, 2.2};
  return f1[static_cast<int>(x(0))] + f2[static_cast<int>(x(1))] + f3[static_cast<int>(x(2))];
}

}  // namespace

TEST_CASE("a fully monotone grouped table certifies on values") {
  CertificationReport rep =
      certify_discrete_fn(grouped_pastdue_table, pastdue_schema(), pastdue_spec());
  CHECK(rep.all_pass());
  // successive differences along x2 at x1 = x3 = 0 are (1.7, 0.6), both >= 0
  const ConstraintResult* ind = rep.find("individual", {"x2"});
  REQUIRE(ind != nullptr);
  CHECK(ind->pass);
}

TEST_CASE("the additive surface fails the strong check with the known witness") {
  CertificationReport rep =
      certify_discrete_fn(additive_pastdue_table, pastdue_schema(), pastdue_spec());
  CHECK(!rep.all_pass());
  for (const char* kind : {"individual", "weak"})
    for (const ConstraintResult& c : rep.constraints)
      if (c.kind == kind) CHECK(c.pass);

  const ConstraintResult* strong = rep.find("strong", {"x2", "x1"});
  REQUIRE(strong != nullptr);
  CHECK(!strong->pass);
  // value(0,2,1) = 3.4 beaten by value(1,1,1) = 3.9
  CHECK(strong->min_margin == doctest::Approx(-0.5).epsilon(1e-12));
  Vec lhs = strong->witness_point, rhs = strong->witness_point_b;
  REQUIRE(lhs.size() == 3);
  CHECK(additive_pastdue_table(rhs) < additive_pastdue_table(lhs));
}

TEST_CASE("recidivism-style pairwise table reproduces the (0,2) vs (1,1) failure") {
  FeatureSchema s;
  s.features = {count_feature("misd", 3), count_feature("fel", 3)};
  MonotoneSpec sp;
  sp.individual = {"misd", "fel"};
  sp.strong_pairs = {{"fel", "misd"}};

  auto table = [](const Vec& x) {
    static const double t[4][4] = {{0.00, 0.33, 0.37, 0.37},
                                   {0.17, 0.50, 0.54, 0.54},
                                   {0.19, 0.53, 0.57, 0.57},
                                   {0.20, 0.53, 0.57, 0.57}};
    return t[static_cast<int>(x(0))][static_cast<int>(x(1))];
  };
  CertificationReport rep = certify_discrete_fn(table, s, sp);
  const ConstraintResult* strong = rep.find("strong", {"fel", "misd"});
  REQUIRE(strong != nullptr);
  CHECK(!strong->pass);

  // the quoted failure: one extra misdemeanor outranks one extra felony,
  // value(1,1) = 0.50 > value(0,2) = 0.37
  Vec a(2), b(2);
  a << 1, 1;
  b << 0, 2;
  CHECK(table(a) > table(b));

  // the reported witness is the worst swap of the same family,
  // value(1,2) = 0.54 > value(0,3) = 0.37
  CHECK(strong->min_margin == doctest::Approx(0.37 - 0.54).epsilon(1e-12));
  CHECK(strong->witness_point(0) == 1);
  CHECK(strong->witness_point(1) == 2);
  CHECK(strong->witness_point_b(0) == 0);
  CHECK(strong->witness_point_b(1) == 3);
}

TEST_CASE("missing-corner additive fit violates strong monotonicity at (1,1)") {
  FeatureSchema s;
  s.features = {count_feature("beta", 2), count_feature("gamma", 2)};
  MonotoneSpec sp;
  sp.individual = {"beta", "gamma"};
  sp.strong_pairs = {{"beta", "gamma"}};
  auto f_tilde = [](const Vec& x) {
    static const double f1[3] = {0.0, 0.3, 0.4};
    static const double f2[3] = {0.0, 0.2, 0.3};
    return f1[static_cast<int>(x(0))] + f2[static_cast<int>(x(1))];
  };
  CertificationReport rep = certify_discrete_fn(f_tilde, s, sp);
  const ConstraintResult* strong = rep.find("strong", {"beta", "gamma"});
  REQUIRE(strong != nullptr);
  CHECK(!strong->pass);
  CHECK(strong->witness_point(0) == 1);
  CHECK(strong->witness_point(1) == 1);
  CHECK(f_tilde(strong->witness_point) == doctest::Approx(0.5));
  CHECK(f_tilde(strong->witness_point_b) == doctest::Approx(0.4));
}

TEST_CASE("constant models certify with zero margins") {
  FeatureSchema s = pastdue_schema();
  MonotoneSpec sp = pastdue_spec();
  GroveArchitecture arch = derive_groups(s, sp);
  GroveModel m = make_grove(arch, Task::Regression);
  CertificationReport dr = certify(m, s, sp);
  CHECK(dr.all_pass());
  for (const ConstraintResult& c : dr.constraints) CHECK(c.min_margin == 0.0);
  CHECK(certify_discrete(m, s, sp).all_pass());
}

TEST_CASE("binary features: weak and strong discrete verdicts coincide") {
  FeatureSchema s;
  for (const char* n : {"a", "b"}) {
    Feature f;
    f.name = n;
    f.kind = FeatureKind::Binary;
    f.lo = 0;
    f.hi = 1;
    s.features.push_back(f);
  }
  Rng rng(43);
  for (int rep = 0; rep < 50; ++rep) {
    double v[2][2];
    for (auto& row : v)
      for (double& cell : row) cell = rng.uniform(-1, 1);
    auto fn = [&](const Vec& x) { return v[static_cast<int>(x(0))][static_cast<int>(x(1))]; };

    MonotoneSpec weak_sp;
    weak_sp.individual = {"a", "b"};
    weak_sp.weak_pairs = {{"a", "b"}};
    MonotoneSpec strong_sp;
    strong_sp.individual = {"a", "b"};
    strong_sp.strong_pairs = {{"a", "b"}};

    const ConstraintResult* w =
        certify_discrete_fn(fn, s, weak_sp).find("weak", {"a", "b"});
    const ConstraintResult* st =
        certify_discrete_fn(fn, s, strong_sp).find("strong", {"a", "b"});
    REQUIRE(w != nullptr);
    REQUIRE(st != nullptr);
    CHECK(w->pass == st->pass);
    CHECK(w->min_margin == st->min_margin);
  }
}

TEST_CASE("derivative certification agrees with the value oracle on sane models") {
  FeatureSchema s = pastdue_schema();
  MonotoneSpec sp = pastdue_spec();
  GroveArchitecture arch = derive_groups(s, sp);

  SUBCASE("hand-built compliant linear group") {
    GroveModel m;
    m.arch = arch;
    m.arch.groups[0].activation = Activation::Identity;
    m.task = Task::Regression;
    Vec c(3);
    c << 0.5, 1.0, 1.5;  // slopes ordered with the severity chain
    m.subnets = {linear_subnet(c)};
    m.centering = Vec::Zero(1);
    CHECK(certify(m, s, sp).all_pass());
    CHECK(certify_discrete(m, s, sp).all_pass());
  }

  SUBCASE("hand-built violating linear group") {
    GroveModel m;
    m.arch = arch;
    m.arch.groups[0].activation = Activation::Identity;
    m.task = Task::Regression;
    Vec c(3);
    c << 1.5, 1.0, 0.5;  // severity order inverted
    m.subnets = {linear_subnet(c)};
    m.centering = Vec::Zero(1);
    CertificationReport dr = certify(m, s, sp);
    CertificationReport vr = certify_discrete(m, s, sp);
    for (const ConstraintResult& c1 : dr.constraints) {
      const ConstraintResult* c2 = vr.find(c1.kind, c1.features);
      REQUIRE(c2 != nullptr);
      CHECK(c1.pass == c2->pass);
    }
  }

  SUBCASE("trained grouped model") {
    Rng rng(7);
    Mat X(120, 3);
    Vec y(120);
    for (int i = 0; i < 120; ++i) {
      for (int j = 0; j < 3; ++j) X(i, j) = rng.integer(3);
      y(i) = 0.4 * X(i, 0) + 0.8 * X(i, 1) + 1.2 * X(i, 2) + 0.05 * rng.normal();
    }
    TrainConfig cfg;
    cfg.epochs_per_round = 200;
    cfg.learning_rate = 0.05;
    cfg.seed = 77;
    FitResult r = fit(X, y, s, sp, arch, Task::Regression, cfg);
    CertificationReport dr = certify(r.model, s, sp);
    CertificationReport vr = certify_discrete(r.model, s, sp);
    for (const ConstraintResult& c1 : dr.constraints) {
      const ConstraintResult* c2 = vr.find(c1.kind, c1.features);
      REQUIRE(c2 != nullptr);
      CHECK(c1.pass == c2->pass);
    }
    if (r.certified) CHECK(dr.all_pass());
  }
}

TEST_CASE("strong certification implies weak certification on the same model") {
  FeatureSchema s;
  Feature y = count_feature("y", 3), z = count_feature("z", 3);
  s.features = {y, z};
  MonotoneSpec sp;
  sp.individual = {"y", "z"};
  sp.weak_pairs = {{"y", "z"}};
  sp.strong_pairs = {{"y", "z"}};
  GroveArchitecture arch = derive_groups(s, sp);
  Rng rng(91);
  int strong_passes = 0;
  for (int rep = 0; rep < 40; ++rep) {
    GroveModel m = random_grove(arch, Task::Regression, rng, 1.5);
    CertificationReport rep_d = certify(m, s, sp);
    const ConstraintResult* st = rep_d.find("strong", {"y", "z"});
    const ConstraintResult* wk = rep_d.find("weak", {"y", "z"});
    REQUIRE(st != nullptr);
    REQUIRE(wk != nullptr);
    if (st->pass) {
      ++strong_passes;
      CHECK(wk->pass);
    }
  }
  CHECK(strong_passes > 0);
}

TEST_CASE("diminishing-marginal-effect detection") {
  // contribution steps (0, 1.7, 2.3): positive and decreasing, but the tail
  // has not dropped below a quarter of the first step
  Vec grid(3), vals(3);
  grid << 0, 1, 2;
  vals << 0, 1.7, 2.3;
  DmeFinding f = detect_dme_values(grid, vals, 0.25);
  CHECK(f.increasing);
  CHECK(f.diminishing);
  CHECK(f.first_differences(0) == doctest::Approx(1.7).epsilon(1e-12));
  CHECK(f.first_differences(1) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(!f.tail_vanishes);
  CHECK(!f.is_dme);

  // square root on [0, 4] sampled densely: a textbook DME shape
  Vec g2 = Vec::LinSpaced(64, 0, 4);
  Vec v2 = g2.array().sqrt();
  DmeFinding f2 = detect_dme_values(g2, v2, 0.25);
  CHECK(f2.is_dme);

  // linear contributions have constant differences
  Vec v3 = 2.0 * g2;
  DmeFinding f3 = detect_dme_values(g2, v3, 0.25);
  CHECK(f3.increasing);
  CHECK(!f3.diminishing);
  CHECK(!f3.is_dme);

  Vec tiny(2), tv(2);
  CHECK_THROWS_AS((void)detect_dme_values(tiny, tv, 0.25), Error);
}

TEST_CASE("structural guard flags separated strong pairs with a flat dominant slope") {
  FeatureSchema s;
  s.features = {count_feature("y", 4), count_feature("z", 4)};
  MonotoneSpec sp;
  sp.individual = {"y", "z"};
  sp.strong_pairs = {{"y", "z"}};

  GroveArchitecture separated;
  for (int i = 0; i < 2; ++i) {
    Group g;
    g.features = {i};
    separated.groups.push_back(g);
  }

  GroveModel m = make_grove(separated, Task::Regression);
  // dominant subnet saturates: logistic(4x) flattens near x = 4
  m.subnets[0].weights[0](0, 0) = 4.0;
  m.subnets[0].out_weights(0) = 1.0;
  m.subnets[1].weights[0](0, 0) = 0.5;
  m.subnets[1].out_weights(0) = 1.0;

  CertificationReport rep = certify(m, s, sp);
  REQUIRE(rep.structural.size() == 1);
  CHECK(rep.structural[0].dominant == "y");
  CHECK(rep.structural[0].dominated == "z");
  CHECK(rep.structural[0].min_slope < 1e-3);

  SUBCASE("co-grouped pairs raise no hazard") {
    MonotoneSpec sp2 = sp;
    GroveArchitecture grouped = derive_groups(s, sp2);
    REQUIRE(grouped.groups.size() == 1);
    GroveModel mg = make_grove(grouped, Task::Regression);
    CHECK(certify(mg, s, sp2).structural.empty());
  }

  SUBCASE("binary pairs are exempt") {
    FeatureSchema sb;
    for (const char* n : {"y", "z"}) {
      Feature f;
      f.name = n;
      f.kind = FeatureKind::Binary;
      f.lo = 0;
      f.hi = 1;
      sb.features.push_back(f);
    }
    GroveModel mb = make_grove(separated, Task::Regression);
    mb.subnets[0].weights[0](0, 0) = 8.0;  // saturates too
    mb.subnets[0].out_weights(0) = 1.0;
    CHECK(certify(mb, sb, sp).structural.empty());
  }
}

TEST_CASE("comparison budget guards giant discrete domains") {
  FeatureSchema s;
  s.features = {count_feature("a", 99), count_feature("b", 99), count_feature("c", 99)};
  MonotoneSpec sp;
  sp.individual = {"a", "b", "c"};
  sp.strong_pairs = {{"a", "b"}};
  auto fn = [](const Vec& x) { return x.sum(); };
  CHECK_THROWS_AS((void)certify_discrete_fn(fn, s, sp, 1000), Error);
}

TEST_CASE("report json carries witnesses for failures") {
  FeatureSchema s;
  s.features = {count_feature("beta", 2), count_feature("gamma", 2)};
  MonotoneSpec sp;
  sp.individual = {"beta", "gamma"};
  sp.strong_pairs = {{"beta", "gamma"}};
  auto f_tilde = [](const Vec& x) {
    static const double f1[3] = {0.0, 0.3, 0.4};
    static const double f2[3] = {0.0, 0.2, 0.3};
    return f1[static_cast<int>(x(0))] + f2[static_cast<int>(x(1))];
  };
  CertificationReport rep = certify_discrete_fn(f_tilde, s, sp);
  std::string js = report_to_json(rep);
  CHECK(js.find("\"pass\": false") != std::string::npos);
  CHECK(js.find("witness_point") != std::string::npos);
  std::string summary = report_summary(rep);
  CHECK(summary.find("FAIL strong") != std::string::npos);
}
