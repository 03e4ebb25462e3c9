#include <doctest.h>

#include <set>

#include "screening/greedy.hpp"
#include "screening/pipeline.hpp"
#include "support.hpp"

using namespace screening;
using testing_support::random_case;

TEST_CASE("config validation") {
  PipelineConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.delta = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.delta = 0.1;
  cfg.c0 = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.c0 = 1.0;
  cfg.split = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK(pipeline_mode_from_string("exact-opt") == PipelineMode::kExactOpt);
  CHECK_THROWS_AS(pipeline_mode_from_string("fast"), ConfigError);
}

TEST_CASE("degenerate policy reduces to plain greedy") {
  const Instance stream = sample_instance(DistributionSpec::single_property_uniform(), 40, 3);
  const Instance train = sample_instance(DistributionSpec::single_property_uniform(), 3, 4);
  const ConstraintSpec spec({5});
  PipelineConfig cfg;
  cfg.mode = PipelineMode::kExactOpt;
  cfg.delta = 0.1;  // warmup floor(0.1/3 * 40 / 5) = 0
  const PipelineResult r = run_pipeline(train, stream, spec, cfg);
  CHECK(r.policy == ThresholdsPolicy::all_zero(1));
  CHECK(r.warmup == 0);
  const GreedyResult g = greedy_screen(stream, spec, 0);
  CHECK(r.retained_ids == g.retained_ids);
  CHECK(r.final_solution == g.final_solution);
  CHECK(r.retained_after_policy == stream.size());
  CHECK(r.optimal_vs_fullstream);
}

TEST_CASE("value-approx on the two-item example") {
  const Instance inst{{Item(0, {{0, 0.9}, {1, 0.8}}), Item(1, {{1, 0.5}})}};
  PipelineConfig cfg;
  cfg.mode = PipelineMode::kValueApprox;
  const PipelineResult r = run_pipeline(inst, inst, ConstraintSpec({1, 1}), cfg);
  CHECK(r.policy.t[0] == Threshold::at(0.9));
  CHECK(r.policy.t[1] == Threshold::at(0.5));
  CHECK(r.retained_final == 2);
  CHECK(r.final_solution.value == doctest::Approx(1.4));
  CHECK(r.value_gap == doctest::Approx(0.0));
}

TEST_CASE("invalid stream is an input error") {
  const Instance bad{{Item(0, {{0, 2.0}})}};
  CHECK_THROWS_AS(run_pipeline(Instance{}, bad, ConstraintSpec({1}), PipelineConfig{}), InputError);
}

TEST_CASE("exact-opt slack sizing") {
  const Instance train = sample_instance(DistributionSpec::single_property_uniform(), 2000, 8);
  PipelineConfig cfg;
  cfg.delta = 0.05;
  const ThresholdsPolicy t = learn_pipeline_policy(train, ConstraintSpec({5}), cfg, 2000);
  const std::size_t m = 5 + retention_slack(5, 1, 2000, 0.05 / 3.0, 1.0);
  CHECK(screen_with_policy(t, train).stats.total == m);
}

TEST_CASE("filter composition and the exact-opt implication") {
  Rng rng(90210);
  std::size_t implied = 0;
  for (int round = 0; round < 200; ++round) {
    auto c = random_case(rng, 40, 3, 5, round % 4 == 0);
    auto t = random_case(rng, 40, 3, 5, false);
    Instance train;
    for (const Item& item : t.inst.items) {
      std::vector<PropValue> props;
      for (const PropValue& pv : item.props) {
        if (pv.property < c.spec.d()) props.push_back(pv);
      }
      if (!props.empty()) train.items.emplace_back(train.size(), std::move(props));
    }
    PipelineConfig cfg;
    cfg.mode = round % 2 ? PipelineMode::kExactOpt : PipelineMode::kValueApprox;
    cfg.delta = 0.3;
    cfg.c0 = static_cast<double>(rng.below(3));
    const PipelineResult r = run_pipeline(train, c.inst, c.spec, cfg);

    CHECK(r.retained_final <= r.retained_after_policy);
    CHECK(r.value_gap >= -1e-9);
    for (ItemId id : r.retained_ids) {
      CHECK(apply_policy(r.policy, c.inst.items[id]));
      CHECK(id >= r.warmup);
    }

    // Top k of every property pass the policy and the optimum avoids the
    // warmup prefix: the pipeline must then recover the optimum.
    bool covered = true;
    for (std::size_t p = 0; p < c.spec.d(); ++p) {
      std::vector<std::pair<double, ItemId>> vals;
      for (const Item& item : c.inst.items) {
        if (auto v = item.value(static_cast<PropertyIndex>(p))) vals.push_back({*v, item.id});
      }
      std::sort(vals.rbegin(), vals.rend());
      for (std::size_t j = 0; j < std::min(vals.size(), c.spec.k()); ++j) {
        covered &= apply_policy(r.policy, c.inst.items[vals[j].second]);
      }
    }
    const auto opt_ids = optimal_matching(c.inst.items, c.spec).real_ids();
    const bool clean = std::all_of(opt_ids.begin(), opt_ids.end(), [&](ItemId id) { return id >= r.warmup; });
    if (covered && clean) {
      ++implied;
      CHECK(r.optimal_vs_fullstream);
    }
  }
  CHECK(implied > 20);
}
