#include <doctest.h>

#include <cmath>

#include "screening/core.hpp"

using namespace screening;

TEST_CASE("sample_instance empty and deterministic") {
  CHECK(sample_instance(DistributionSpec::single_property_uniform(), 0, 1).empty());

  const auto a = sample_instance(DistributionSpec::single_property_uniform(), 3, 5);
  const auto b = sample_instance(DistributionSpec::single_property_uniform(), 3, 5);
  REQUIRE(a.size() == 3);
  CHECK(a == b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.items[i].id == i);
    REQUIRE(a.items[i].props.size() == 1);
    CHECK(a.items[i].props[0].property == 0);
    CHECK(a.items[i].props[0].value >= 0.0);
    CHECK(a.items[i].props[0].value <= 1.0);
  }
  CHECK(a != sample_instance(DistributionSpec::single_property_uniform(), 3, 6));
}

TEST_CASE("disjoint classes are equiprobable") {
  const std::size_t n = 100000;
  const auto inst = sample_instance(DistributionSpec::disjoint_properties_uniform(4), n, 9);
  std::vector<std::size_t> counts(4, 0);
  for (const Item& item : inst.items) {
    REQUIRE(item.props.size() == 1);
    ++counts[item.props[0].property];
  }
  const double sd = std::sqrt(0.25 * 0.75 / n);
  for (std::size_t c : counts) {
    const double f = static_cast<double>(c) / n;
    CHECK(std::abs(f - 0.25) <= 0.01);
    CHECK(std::abs(f - 0.25) <= 5 * sd);
  }
}

TEST_CASE("overlap-bernoulli never yields empty items") {
  const auto inst = sample_instance(DistributionSpec::overlap_bernoulli({0.1, 0.05, 0.0}), 2000, 3);
  for (const Item& item : inst.items) {
    CHECK_FALSE(item.props.empty());
    CHECK_FALSE(item.has(2));
  }
  CHECK(validate_instance(inst, ConstraintSpec({1, 1, 1})).empty());
}

TEST_CASE("distribution validation") {
  CHECK_THROWS_AS(DistributionSpec::overlap_bernoulli({0.0, 0.0}).validate(), ConfigError);
  CHECK_THROWS_AS(DistributionSpec::overlap_bernoulli({1.5}).validate(), ConfigError);
  CHECK_THROWS_AS(DistributionSpec::disjoint_properties_uniform(0).validate(), ConfigError);
  DistributionSpec bad = DistributionSpec::single_property_uniform();
  bad.d = 2;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(sample_instance(bad, 3, 1), ConfigError);
  CHECK(distribution_kind_from_string("overlap-bernoulli") == DistributionKind::kOverlapBernoulli);
  CHECK_THROWS_AS(distribution_kind_from_string("gaussian"), ConfigError);
}

TEST_CASE("constraint spec") {
  ConstraintSpec spec({1, 2});
  CHECK(spec.d() == 2);
  CHECK(spec.k() == 3);
  CHECK_THROWS_AS(ConstraintSpec({}), ConfigError);
  CHECK_THROWS_AS(ConstraintSpec({1, 0}), ConfigError);
}

TEST_CASE("dummy items") {
  const auto d12 = dummy_items(ConstraintSpec({1, 2}));
  REQUIRE(d12.size() == 3);
  for (const Item& item : d12) {
    CHECK(is_dummy_id(item.id));
    CHECK(item.props == std::vector<PropValue>{{0, 0.0}, {1, 0.0}});
  }
  CHECK(dummy_items(ConstraintSpec({2})).size() == 2);
  CHECK(dummy_items(ConstraintSpec({1})).size() == 1);
  CHECK(validate_items(d12, ConstraintSpec({1, 2}), true).empty());
  CHECK_FALSE(validate_items(d12, ConstraintSpec({1, 2}), false).empty());
}

TEST_CASE("validate_instance reports violations") {
  const ConstraintSpec spec({1, 1});
  Instance ok{{Item(0, {{0, 0.2}}), Item(1, {{1, 1.0}})}};
  CHECK(validate_instance(ok, spec).empty());

  Instance high{{Item(0, {{0, 1.5}})}};
  auto r = validate_instance(high, spec);
  REQUIRE(r.size() == 1);
  CHECK(r[0].kind == ViolationKind::kValueOutOfRange);

  Instance unknown{{Item(0, {{2, 0.5}})}};
  r = validate_instance(unknown, spec);
  REQUIRE(r.size() == 1);
  CHECK(r[0].kind == ViolationKind::kUnknownProperty);

  Instance empty{{Item(0, {})}};
  r = validate_instance(empty, spec);
  REQUIRE(r.size() == 1);
  CHECK(r[0].kind == ViolationKind::kEmptyProps);

  Instance dup{{Item(0, {{0, 0.1}}), Item(0, {{0, 0.2}})}};
  r = validate_instance(dup, spec);
  bool saw_dup = false;
  for (const auto& v : r) saw_dup |= v.kind == ViolationKind::kDuplicateId;
  CHECK(saw_dup);

  Instance nan{{Item(0, {{0, std::nan("")}})}};
  r = validate_instance(nan, spec);
  REQUIRE(r.size() == 1);
  CHECK(r[0].kind == ViolationKind::kValueOutOfRange);
}
