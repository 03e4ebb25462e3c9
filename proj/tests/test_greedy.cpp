#include <doctest.h>

#include <set>

#include "screening/greedy.hpp"
#include "support.hpp"

using namespace screening;
using testing_support::random_case;

namespace {

Instance values_stream(const std::vector<double>& vals) {
  Instance inst;
  for (std::size_t i = 0; i < vals.size(); ++i) inst.items.emplace_back(i, std::vector<PropValue>{{0, vals[i]}});
  return inst;
}

// Straight re-solve per arrival, no price filter.
std::vector<ItemId> naive_greedy(const Instance& stream, const ConstraintSpec& spec, std::size_t warmup) {
  std::vector<Item> kept;
  std::vector<ItemId> ids;
  for (std::size_t i = warmup; i < stream.size(); ++i) {
    kept.push_back(stream.items[i]);
    if (optimal_matching(kept, spec).contains(stream.items[i].id)) {
      ids.push_back(stream.items[i].id);
    } else {
      kept.pop_back();
    }
  }
  return ids;
}

}  // namespace

TEST_CASE("warmup_length") {
  CHECK(warmup_length(1000, 10, 0.1) == 10);
  CHECK(warmup_length(100, 10, 0.0) == 0);
  CHECK(warmup_length(10, 3, 0.5) == 1);
  CHECK(warmup_length(1000, 5, 0.1) == 20);
  CHECK_THROWS_AS(warmup_length(10, 0, 0.1), ConfigError);
  CHECK_THROWS_AS(warmup_length(10, 1, 1.5), ConfigError);
}

TEST_CASE("running maxima are retained") {
  const Instance s = values_stream({0.2, 0.5, 0.4, 0.9});
  const ConstraintSpec spec({1});
  const GreedyResult r0 = greedy_screen(s, spec, 0);
  CHECK(r0.retained_ids == std::vector<ItemId>{0, 1, 3});
  CHECK(r0.final_solution.real_ids() == std::vector<ItemId>{3});
  const GreedyResult r1 = greedy_screen(s, spec, 1);
  CHECK(r1.retained_ids == std::vector<ItemId>{1, 3});
  CHECK(r1.warmup == 1);
}

TEST_CASE("capacity above supply keeps everything") {
  const Instance s = values_stream({0.3, 0.1, 0.0, 0.8});
  const GreedyResult r = greedy_screen(s, ConstraintSpec({5}), 0);
  CHECK(r.retained_ids == std::vector<ItemId>{0, 1, 2, 3});
}

TEST_CASE("trace") {
  const Instance s = values_stream({0.2, 0.5, 0.4, 0.9});
  GreedyOptions opt;
  opt.trace = true;
  const GreedyResult r = greedy_screen(s, ConstraintSpec({1}), 1, opt);
  REQUIRE(r.trace.size() == 4);
  CHECK_FALSE(r.trace[0].retained);
  CHECK(r.trace[0].running_value == 0.0);
  CHECK(r.trace[1].retained);
  CHECK(r.trace[2].running_value == doctest::Approx(0.5));
  CHECK(r.trace[3].running_value == doctest::Approx(0.9));
}

TEST_CASE("errors") {
  const Instance s = values_stream({0.2, 0.5});
  CHECK_THROWS_AS(greedy_screen(s, ConstraintSpec({1}), 3), InputError);
  const Instance bad = values_stream({0.2, 1.5});
  CHECK_THROWS_AS(greedy_screen(bad, ConstraintSpec({1}), 0), InputError);
}

TEST_CASE("price filter agrees with a full re-solve per arrival") {
  Rng rng(5150);
  for (int round = 0; round < 300; ++round) {
    auto c = random_case(rng, 25, 3, 5, round % 2 == 0);
    const std::size_t warmup = c.inst.empty() ? 0 : rng.below(c.inst.size() / 3 + 1);
    const GreedyResult r = greedy_screen(c.inst, c.spec, warmup);
    CHECK(r.retained_ids == naive_greedy(c.inst, c.spec, warmup));
  }
}

TEST_CASE("retained-set invariants and optimum capture") {
  Rng rng(31337);
  std::size_t captured_cases = 0;
  for (int round = 0; round < 300; ++round) {
    auto c = random_case(rng, 30, 3, 5, round % 3 == 0);
    const std::size_t warmup = c.inst.empty() ? 0 : rng.below(c.inst.size() / 4 + 1);
    const GreedyResult r = greedy_screen(c.inst, c.spec, warmup);
    const std::set<ItemId> kept(r.retained_ids.begin(), r.retained_ids.end());
    for (ItemId id : r.retained_ids) CHECK(id >= warmup);
    for (ItemId id : r.final_solution.real_ids()) CHECK(kept.count(id) == 1);

    const Solution full = optimal_matching(c.inst.items, c.spec);
    const auto opt_ids = full.real_ids();
    const bool clean = std::all_of(opt_ids.begin(), opt_ids.end(), [&](ItemId id) { return id >= warmup; });
    if (clean) {
      ++captured_cases;
      for (ItemId id : opt_ids) CHECK(kept.count(id) == 1);
      CHECK(r.final_solution == full);
    }
  }
  CHECK(captured_cases > 100);
}

TEST_CASE("prefix optima consist of items retained on arrival") {
  Rng rng(4242);
  for (int round = 0; round < 150; ++round) {
    auto c = random_case(rng, 20, 3, 4, round % 2 == 0);
    const GreedyResult r = greedy_screen(c.inst, c.spec, 0);
    const std::set<ItemId> kept(r.retained_ids.begin(), r.retained_ids.end());
    for (std::size_t i = 1; i <= c.inst.size(); ++i) {
      std::span<const Item> prefix(c.inst.items.data(), i);
      for (ItemId id : optimal_matching(prefix, c.spec).real_ids()) CHECK(kept.count(id) == 1);
    }
  }
}
