#include <doctest.h>

#include "screening/matching.hpp"
#include "support.hpp"

using namespace screening;
using testing_support::feasible;
using testing_support::random_case;

namespace {

std::vector<Item> two_item_example() { return {Item(0, {{0, 0.9}, {1, 0.8}}), Item(1, {{1, 0.5}})}; }

}  // namespace

TEST_CASE("pick the maximum") {
  const std::vector<Item> items{Item(0, {{0, 0.3}}), Item(1, {{0, 0.7}})};
  const Solution s = optimal_matching(items, ConstraintSpec({1}));
  REQUIRE(s.assignment.size() == 1);
  CHECK(s.assignment[0] == Assignment{1, 0});
  CHECK(s.value == doctest::Approx(0.7));
}

TEST_CASE("two properties") {
  const ConstraintSpec spec({1, 1});
  const Solution s = optimal_matching(two_item_example(), spec);
  CHECK(s.assignment == std::vector<Assignment>{{0, 0}, {1, 1}});
  CHECK(s.value == doctest::Approx(1.4));
  CHECK(brute_force_matching(two_item_example(), spec) == s);
}

TEST_CASE("empty input uses dummies") {
  const ConstraintSpec spec({2, 1});
  const Solution s = optimal_matching({}, spec);
  CHECK(s.assignment.size() == 3);
  CHECK(s.real_count() == 0);
  CHECK(s.value == 0.0);
  CHECK(s.per_property(2)[0].size() == 2);
}

TEST_CASE("slot for a property nobody has is filled by a dummy") {
  const std::vector<Item> items{Item(0, {{1, 0.9}})};
  const ConstraintSpec spec({1, 1});
  const Solution s = brute_force_matching(items, spec);
  CHECK(s == optimal_matching(items, spec));
  const auto parts = s.per_property(2);
  REQUIRE(parts[0].size() == 1);
  CHECK(is_dummy_id(parts[0][0]));
  CHECK(parts[1] == std::vector<ItemId>{0});
  CHECK(s.value == doctest::Approx(0.9));
}

TEST_CASE("equal values go to the larger id") {
  const std::vector<Item> items{Item(0, {{0, 0.5}}), Item(1, {{0, 0.5}})};
  CHECK(optimal_matching(items, ConstraintSpec({1})).real_ids() == std::vector<ItemId>{1});
  CHECK(brute_force_matching(items, ConstraintSpec({1})).real_ids() == std::vector<ItemId>{1});
}

TEST_CASE("zero-value real items beat dummies") {
  const std::vector<Item> items{Item(0, {{0, 0.0}})};
  CHECK(optimal_matching(items, ConstraintSpec({2})).real_ids() == std::vector<ItemId>{0});
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(optimal_matching(std::vector<Item>{Item(0, {{3, 0.5}})}, ConstraintSpec({1})), InputError);
  std::vector<Item> many;
  for (ItemId i = 0; i < 11; ++i) many.emplace_back(i, std::vector<PropValue>{{0, 0.1}});
  CHECK_THROWS_AS(brute_force_matching(many, ConstraintSpec({1})), RefusalError);
  CHECK_THROWS_AS(brute_force_matching({}, ConstraintSpec({6})), RefusalError);
}

TEST_CASE("oracle equivalence on random small instances") {
  Rng rng(2024);
  for (int round = 0; round < 600; ++round) {
    const bool coarse = round % 2 == 0;
    auto c = random_case(rng, 8, 3, 4, coarse);
    const Solution fast = optimal_matching(c.inst.items, c.spec);
    const Solution slow = brute_force_matching(c.inst.items, c.spec);
    INFO("round " << round);
    REQUIRE(fast == slow);
    CHECK(feasible(fast, c.inst.items, c.spec));
    CHECK(recompute_value(fast, c.inst.items, c.spec) == doctest::Approx(fast.value).epsilon(1e-12));
  }
}

TEST_CASE("permutation invariance, monotonicity and saturation") {
  Rng rng(77);
  for (int round = 0; round < 300; ++round) {
    auto c = random_case(rng, 12, 3, 6, round % 3 == 0);
    const Solution base = optimal_matching(c.inst.items, c.spec);
    CHECK(base.assignment.size() == c.spec.k());

    std::vector<Item> shuffled = c.inst.items;
    for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
    CHECK(optimal_matching(shuffled, c.spec) == base);

    std::vector<Item> more = c.inst.items;
    more.emplace_back(more.size(), std::vector<PropValue>{{0, rng.uniform01()}});
    CHECK(optimal_matching(more, c.spec).value >= base.value - 1e-12);
  }
}

TEST_CASE("entry prices never reject an item that would enter") {
  Rng rng(99);
  std::size_t rejected = 0;
  for (int round = 0; round < 400; ++round) {
    auto c = random_case(rng, 10, 3, 5, round % 2 == 0);
    if (c.inst.empty()) continue;
    std::vector<Item> base(c.inst.items.begin(), c.inst.items.end() - 1);
    const Item& cand = c.inst.items.back();
    const OptimumWithPrices opt = optimal_matching_with_prices(base, c.spec);
    CHECK(opt.solution == optimal_matching(base, c.spec));
    const bool enters = optimal_matching(c.inst.items, c.spec).contains(cand.id);
    if (!opt.prices.may_enter(cand)) {
      ++rejected;
      CHECK_FALSE(enters);
    }
  }
  CHECK(rejected > 0);
}

TEST_CASE("recompute_value rejects infeasible solutions") {
  const ConstraintSpec spec({1, 1});
  Solution s = optimal_matching(two_item_example(), spec);
  s.assignment[1].property = 0;
  CHECK_THROWS_AS(recompute_value(s, two_item_example(), spec), InputError);
}
