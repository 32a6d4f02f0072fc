#include <doctest.h>

#include <cmath>

#include "monogrove/grove.hpp"
#include "test_util.hpp"

using namespace monogrove;
using namespace testutil;

namespace {

FeatureSchema small_schema() {
  FeatureSchema s;
  for (int i = 0; i < 4; ++i) {
    Feature f;
    f.name = "f" + std::to_string(i);
    f.kind = i < 2 ? FeatureKind::Count : FeatureKind::Continuous;
    f.lo = i < 2 ? 0 : -1;
    f.hi = i < 2 ? 3 : 1;
    s.features.push_back(f);
  }
  return s;
}

// one two-feature group {f0, f1} and two singletons
GroveArchitecture small_arch() {
  GroveArchitecture arch;
  Group g01;
  g01.features = {0, 1};
  Group g2;
  g2.features = {2};
  Group g3;
  g3.features = {3};
  arch.groups = {g01, g2, g3};
  return arch;
}

}  // namespace

TEST_CASE("zero subnets leave only the intercept") {
  GroveModel m = make_grove(small_arch(), Task::Regression);
  m.intercept = 0.3;
  Vec x = Vec::Zero(4);
  CHECK(predict(m, x).score == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(!predict(m, x).probability.has_value());
}

TEST_CASE("classification fills probability through the logistic link") {
  GroveModel m = make_grove(small_arch(), Task::BinaryClassification);
  Vec x = Vec::Zero(4);
  Prediction p = predict(m, x);
  REQUIRE(p.probability.has_value());
  CHECK(*p.probability == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("score is the sum of independent subnet evaluations") {
  Rng rng(17);
  for (int rep = 0; rep < 25; ++rep) {
    GroveModel m = random_grove(small_arch(), Task::Regression, rng, 1.3);
    m.intercept = rng.uniform(-1, 1);
    Vec x(4);
    for (int j = 0; j < 4; ++j) x(j) = rng.uniform(-2, 2);
    double want = m.intercept;
    for (int g = 0; g < m.num_groups(); ++g) {
      Vec s = group_slice(x, m.arch.groups[g]);
      want += eval(m.subnets[g], s);
    }
    CHECK(rel_err(predict(m, x).score, want) < 1e-12);

    double sum = m.intercept;
    for (int g = 0; g < m.num_groups(); ++g) {
      Vec s = group_slice(x, m.arch.groups[g]);
      sum += subnet_contribution(m, g, s);
    }
    CHECK(rel_err(predict(m, x).score, sum) < 1e-12);
  }
}

TEST_CASE("changing one group's features moves only that contribution") {
  Rng rng(29);
  GroveModel m = random_grove(small_arch(), Task::Regression, rng, 1.0);
  Vec x(4), x2(4);
  for (int j = 0; j < 4; ++j) x(j) = x2(j) = rng.uniform(-1, 1);
  x2(2) += 0.5;  // singleton group of f2
  for (int g = 0; g < m.num_groups(); ++g) {
    Vec a = group_slice(x, m.arch.groups[g]);
    Vec b = group_slice(x2, m.arch.groups[g]);
    double ca = subnet_contribution(m, g, a);
    double cb = subnet_contribution(m, g, b);
    if (m.arch.groups[g].contains(2))
      CHECK(ca != cb);
    else
      CHECK(ca == cb);
  }
}

TEST_CASE("input partials assemble subnet gradients with zeros across groups") {
  GroveModel zero = make_grove(small_arch(), Task::Regression);
  Vec x = Vec::Zero(4);
  CHECK(input_partials(zero, x).isZero(0));

  Rng rng(41);
  GroveModel m = random_grove(small_arch(), Task::Regression, rng, 1.2);
  for (int rep = 0; rep < 10; ++rep) {
    Vec pt(4);
    for (int j = 0; j < 4; ++j) pt(j) = rng.uniform(-1, 1);
    Vec grad = input_partials(m, pt);
    const double h = 1e-6;
    for (int j = 0; j < 4; ++j) {
      Vec a = pt, b = pt;
      a(j) += h;
      b(j) -= h;
      double fd = (predict(m, a).score - predict(m, b).score) / (2 * h);
      CHECK(rel_err(grad(j), fd) < 1e-6);
    }
  }

  // two singletons: the gradient is the concatenation of their 1-D slopes
  GroveArchitecture singles;
  for (int i = 0; i < 2; ++i) {
    Group g;
    g.features = {i};
    singles.groups.push_back(g);
  }
  GroveModel ms = random_grove(singles, Task::Regression, rng, 1.0);
  Vec p2(2);
  p2 << 0.4, -0.7;
  Vec grad = input_partials(ms, p2);
  Vec s0(1), s1(1);
  s0 << 0.4;
  s1 << -0.7;
  CHECK(grad(0) == eval_full(ms.subnets[0], s0).input_grad(0));
  CHECK(grad(1) == eval_full(ms.subnets[1], s1).input_grad(0));
}

TEST_CASE("centering anchors every contribution at the domain minimum") {
  Rng rng(53);
  FeatureSchema schema = small_schema();
  GroveModel m = random_grove(small_arch(), Task::Regression, rng, 1.4);
  m.intercept = 0.25;
  Vec probe(4);
  for (int j = 0; j < 4; ++j) probe(j) = rng.uniform(-1, 1);
  double before = predict(m, probe).score;

  center_contributions(m, schema);
  for (int g = 0; g < m.num_groups(); ++g) {
    const Group& grp = m.arch.groups[g];
    Vec lo(grp.features.size());
    for (std::size_t i = 0; i < grp.features.size(); ++i)
      lo(i) = schema.features[grp.features[i]].lo;
    CHECK(std::abs(subnet_contribution(m, g, lo)) < 1e-12);
  }
  CHECK(rel_err(predict(m, probe).score, before) < 1e-12);
}

TEST_CASE("model json round trip is exact") {
  Rng rng(61);
  FeatureSchema schema = small_schema();
  GroveModel m = random_grove(small_arch(), Task::BinaryClassification, rng, 1.1);
  m.intercept = -0.4;
  Scaler sc;
  sc.entries.resize(4);
  sc.entries[2] = {true, 0.25, 1.75};

  std::string text = model_to_json(m, schema, &sc);
  LoadedModel back = model_from_json(text);
  CHECK((flatten(back.model) - flatten(m)).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(back.model.task == m.task);
  CHECK(back.schema.size() == schema.size());
  REQUIRE(back.scaler.has_value());
  CHECK(back.scaler->entries[2].applied);
  CHECK(back.scaler->entries[2].sd == 1.75);
  CHECK(model_to_json(back.model, back.schema, &*back.scaler) == text);
}

TEST_CASE("predict rejects inputs of the wrong dimension") {
  GroveModel m = make_grove(small_arch(), Task::Regression);
  Vec bad = Vec::Zero(3);
  CHECK_THROWS_AS((void)predict(m, bad), SchemaError);
  Vec bad2 = Vec::Zero(5);
  CHECK_THROWS_AS((void)input_partials(m, bad2), SchemaError);
  Vec ok = Vec::Zero(2);
  CHECK_THROWS_AS((void)subnet_contribution(m, 7, ok), SchemaError);
}
