#include "screening/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "screening/greedy.hpp"
#include "screening/matching.hpp"
#include "screening/pipeline.hpp"
#include "screening/rng.hpp"

namespace screening {

namespace {

// Runs body(i) for i in [0, count) on `workers` threads. Callers write
// results by index so the outcome does not depend on scheduling.
template <typename Body>
void parallel_for(std::size_t count, std::size_t workers, Body&& body) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i, std::size_t{0});
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count; i = next++) body(i, w);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::uint64_t trial_seed(std::uint64_t root, std::size_t trial) { return derive_seed(root, "trial", trial); }

}  // namespace

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kGreedy:
      return "greedy";
    case Algorithm::kPipelineValueApprox:
      return "value-approx";
    case Algorithm::kPipelineExactOpt:
      return "exact-opt";
    case Algorithm::kPolicyFixed:
      return "policy-fixed";
  }
  return "unknown";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "greedy") return Algorithm::kGreedy;
  if (name == "value-approx" || name == "pipeline-value-approx") return Algorithm::kPipelineValueApprox;
  if (name == "exact-opt" || name == "pipeline-exact-opt") return Algorithm::kPipelineExactOpt;
  if (name == "policy-fixed") return Algorithm::kPolicyFixed;
  throw ConfigError(fmt::format("unknown algorithm '{}'", name));
}

void ExperimentConfig::validate() const {
  dist.validate();
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (n < spec.k()) throw ConfigError(fmt::format("n = {} is below k = {}", n, spec.k()));
  if (dist.d != spec.d()) {
    throw ConfigError(fmt::format("distribution has d = {} but the spec has d = {}", dist.d, spec.d()));
  }
  if (!(delta >= 0.0 && delta <= 1.0)) throw ConfigError(fmt::format("delta {} outside [0,1]", delta));
  const bool pipeline = algorithm == Algorithm::kPipelineValueApprox || algorithm == Algorithm::kPipelineExactOpt;
  if (pipeline && !(delta > 0.0 && delta < 1.0)) throw ConfigError("pipelines need 0 < delta < 1");
  if (algorithm == Algorithm::kPolicyFixed) {
    if (!policy) throw ConfigError("policy-fixed needs a policy");
    if (policy->d() != spec.d()) {
      throw ConfigError(fmt::format("policy has {} thresholds, spec has d = {}", policy->d(), spec.d()));
    }
  } else if (policy) {
    throw ConfigError(fmt::format("algorithm {} does not take a policy", to_string(algorithm)));
  }
}

Summary summarize(std::span<const double> xs) {
  Summary s;
  if (xs.empty()) return s;
  double sum = 0.0;
  s.min = s.max = xs.front();
  for (double x : xs) {
    sum += x;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

namespace {

TrialRecord run_one(const ExperimentConfig& cfg, std::size_t t) {
  TrialRecord rec;
  rec.trial = t;
  rec.seed = trial_seed(cfg.seed, t);
  const Instance stream = sample_instance(cfg.dist, cfg.n, derive_seed(rec.seed, "stream"));

  switch (cfg.algorithm) {
    case Algorithm::kGreedy: {
      const std::size_t warmup = warmup_length(cfg.n, cfg.spec.k(), cfg.delta);
      const GreedyResult res = greedy_screen(stream, cfg.spec, warmup);
      const Solution full = optimal_matching(stream.items, cfg.spec);
      rec.retained = rec.retained_after_policy = res.retained_ids.size();
      rec.opt = full.value;
      rec.value = res.final_solution.value;
      rec.success = exact_solution_value(res.final_solution, stream) == exact_solution_value(full, stream);
      break;
    }
    case Algorithm::kPipelineValueApprox:
    case Algorithm::kPipelineExactOpt: {
      const Instance train = sample_instance(cfg.dist, cfg.n, derive_seed(rec.seed, "train"));
      PipelineConfig pc;
      pc.mode = cfg.algorithm == Algorithm::kPipelineExactOpt ? PipelineMode::kExactOpt : PipelineMode::kValueApprox;
      pc.delta = cfg.delta;
      pc.c0 = cfg.c0;
      const PipelineResult res = run_pipeline(train, stream, cfg.spec, pc);
      rec.retained = res.retained_final;
      rec.retained_after_policy = res.retained_after_policy;
      rec.opt = res.full_stream_value;
      rec.value = res.final_solution.value;
      rec.success = res.optimal_vs_fullstream;
      break;
    }
    case Algorithm::kPolicyFixed: {
      const ScreenResult res = screen_with_policy(*cfg.policy, stream);
      const Solution kept = optimal_matching(res.retained, cfg.spec);
      const Solution full = optimal_matching(stream.items, cfg.spec);
      rec.retained = rec.retained_after_policy = res.stats.total;
      rec.opt = full.value;
      rec.value = kept.value;
      rec.success = exact_solution_value(kept, stream) == exact_solution_value(full, stream);
      break;
    }
  }
  return rec;
}

}  // namespace

void aggregate(TrialStats& stats) {
  std::vector<double> retained, opt;
  std::size_t successes = 0;
  for (const TrialRecord& r : stats.records) {
    retained.push_back(static_cast<double>(r.retained));
    opt.push_back(r.opt);
    successes += r.success ? 1 : 0;
  }
  stats.retained = summarize(retained);
  stats.opt = summarize(opt);
  stats.success_rate = stats.records.empty() ? 0.0 : static_cast<double>(successes) / static_cast<double>(stats.records.size());
  stats.max_dev_count = 0.0;
  stats.max_dev_value = 0.0;
  for (std::size_t i = 0; i < retained.size(); ++i) {
    stats.max_dev_count = std::max(stats.max_dev_count, std::abs(retained[i] - stats.retained.mean));
    stats.max_dev_value = std::max(stats.max_dev_value, std::abs(opt[i] - stats.opt.mean));
  }
}

TrialStats run_trials(const ExperimentConfig& cfg) {
  cfg.validate();
  TrialStats stats;
  stats.records.resize(cfg.trials);
  parallel_for(cfg.trials, cfg.workers, [&](std::size_t t, std::size_t) { stats.records[t] = run_one(cfg, t); });
  aggregate(stats);
  return stats;
}

ConcentrationStats concentration_experiment(const DistributionSpec& dist, const ConstraintSpec& spec, std::size_t n,
                                            std::size_t trials, std::uint64_t seed, std::size_t workers) {
  dist.validate();
  if (trials < 1) throw ConfigError("trials must be >= 1");
  ConcentrationStats out;
  out.opt.resize(trials);
  parallel_for(trials, workers, [&](std::size_t t, std::size_t) {
    const Instance inst = sample_instance(dist, n, derive_seed(trial_seed(seed, t), "stream"));
    out.opt[t] = optimal_matching(inst.items, spec).value;
  });
  out.summary = summarize(out.opt);
  const double k = static_cast<double>(spec.k());
  for (double dp : kTailDeltaGrid) {
    TailRow row;
    row.delta_prime = dp;
    row.alpha = std::sqrt(2.0 * k * std::log(2.0 / dp));
    std::size_t hits = 0;
    for (double v : out.opt) hits += std::abs(v - out.summary.mean) >= row.alpha ? 1 : 0;
    row.exceed_fraction = static_cast<double>(hits) / static_cast<double>(trials);
    row.bound = 2.0 * std::exp(-row.alpha * row.alpha / (2.0 * k));
    row.standard_error = std::sqrt(row.bound * (1.0 - row.bound) / static_cast<double>(trials));
    out.tail.push_back(row);
  }
  return out;
}

std::vector<PolicyEvaluation> evaluate_policies(const Instance& inst, const ConstraintSpec& spec,
                                                std::span<const ThresholdsPolicy> net) {
  std::vector<PolicyEvaluation> out;
  out.reserve(net.size());
  if (spec.d() == 1) {
    // Nested single-property policies: one sort, then prefix sums.
    std::vector<double> vals;
    vals.reserve(inst.size());
    for (const Item& item : inst.items) {
      if (auto v = item.value(0)) vals.push_back(*v);
    }
    std::sort(vals.begin(), vals.end(), std::greater<>());
    const std::size_t k = spec.k();
    std::vector<double> prefix(std::min(k, vals.size()) + 1, 0.0);
    for (std::size_t i = 0; i + 1 < prefix.size(); ++i) prefix[i + 1] = prefix[i] + vals[i];
    for (const ThresholdsPolicy& policy : net) {
      if (policy.d() != 1) throw ConfigError("policy dimension does not match the spec");
      const Threshold& t = policy.t[0];
      std::size_t count = 0;
      if (!t.is_above()) {
        count = static_cast<std::size_t>(
            std::partition_point(vals.begin(), vals.end(), [&](double v) { return v >= t.value(); }) - vals.begin());
      }
      out.push_back({{count}, count, prefix[std::min(count, prefix.size() - 1)]});
    }
    return out;
  }
  for (const ThresholdsPolicy& policy : net) {
    const ScreenResult res = screen_with_policy(policy, inst, spec);
    out.push_back({res.stats.per_property, res.stats.total, *res.stats.value});
  }
  return out;
}

Quantiles quantiles(std::vector<double> xs) {
  Quantiles q;
  if (xs.empty()) return q;
  std::sort(xs.begin(), xs.end());
  // Nearest-rank definition.
  auto at = [&](double p) {
    const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(xs.size())));
    return xs[std::clamp<std::size_t>(rank, 1, xs.size()) - 1];
  };
  q.q50 = at(0.50);
  q.q90 = at(0.90);
  q.q95 = at(0.95);
  q.q99 = at(0.99);
  return q;
}

namespace {

// Integer accumulators so that merging per-worker partial sums is exact and
// independent of how trials were distributed.
struct CalibrationSums {
  std::vector<std::uint64_t> total;
  std::vector<std::uint64_t> total_sq;
  std::vector<std::uint64_t> per_property;  // policy-major, d entries each
  std::vector<__int128> value;              // units of 2^-64
  std::vector<__int128> value_sq;           // units of 2^-64 (value quantized to 2^-32)

  CalibrationSums(std::size_t policies, std::size_t d)
      : total(policies, 0), total_sq(policies, 0), per_property(policies * d, 0), value(policies, 0),
        value_sq(policies, 0) {}

  void add(const std::vector<PolicyEvaluation>& evals, std::size_t d) {
    for (std::size_t j = 0; j < evals.size(); ++j) {
      const auto& e = evals[j];
      total[j] += e.total;
      total_sq[j] += static_cast<std::uint64_t>(e.total) * e.total;
      for (std::size_t i = 0; i < d; ++i) per_property[j * d + i] += e.per_property[i];
      value[j] += exact_value(e.value);
      const __int128 coarse = static_cast<__int128>(std::nearbyint(std::ldexp(e.value, 32)));
      value_sq[j] += coarse * coarse;
    }
  }

  void merge(const CalibrationSums& o) {
    for (std::size_t j = 0; j < total.size(); ++j) {
      total[j] += o.total[j];
      total_sq[j] += o.total_sq[j];
      value[j] += o.value[j];
      value_sq[j] += o.value_sq[j];
    }
    for (std::size_t j = 0; j < per_property.size(); ++j) per_property[j] += o.per_property[j];
  }
};

double to_double_scaled(__int128 x, int shift) {
  // x * 2^-shift, split to keep precision.
  const bool neg = x < 0;
  const unsigned __int128 u = neg ? static_cast<unsigned __int128>(-x) : static_cast<unsigned __int128>(x);
  const double hi = std::ldexp(static_cast<double>(static_cast<std::uint64_t>(u >> 64)), 64 - shift);
  const double lo = std::ldexp(static_cast<double>(static_cast<std::uint64_t>(u)), -shift);
  return neg ? -(hi + lo) : hi + lo;
}

}  // namespace

ConvergenceStats convergence_experiment(const DistributionSpec& dist, const ConstraintSpec& spec, std::size_t n,
                                        std::size_t trials, std::span<const ThresholdsPolicy> net,
                                        std::uint64_t seed, ConvergenceOptions options) {
  dist.validate();
  if (net.empty()) throw ConfigError("convergence experiment needs a nonempty net");
  if (net.size() > options.max_policies) {
    throw RefusalError(fmt::format("net of {} policies exceeds the budget of {}", net.size(), options.max_policies));
  }
  for (const ThresholdsPolicy& p : net) {
    if (p.d() != spec.d()) throw ConfigError("policy dimension does not match the spec");
  }
  if (trials < 1 || options.calibration_factor < 1) throw ConfigError("trials and calibration factor must be >= 1");
  const std::size_t d = spec.d();
  const std::size_t policies = net.size();

  // Calibration: estimate rho, rho_i, nu per policy.
  const std::size_t calib_trials = trials * options.calibration_factor;
  const std::size_t workers = std::max<std::size_t>(1, std::min(options.workers, calib_trials));
  std::vector<CalibrationSums> partial(workers, CalibrationSums(policies, d));
  parallel_for(calib_trials, workers, [&](std::size_t t, std::size_t w) {
    const Instance inst = sample_instance(dist, n, derive_seed(derive_seed(seed, "calibration", t), "stream"));
    partial[w].add(evaluate_policies(inst, spec, net), d);
  });
  CalibrationSums sums = std::move(partial[0]);
  for (std::size_t w = 1; w < workers; ++w) sums.merge(partial[w]);

  ConvergenceStats out;
  const double m = static_cast<double>(calib_trials);
  out.estimates.resize(policies);
  for (std::size_t j = 0; j < policies; ++j) {
    PolicyEstimate& e = out.estimates[j];
    e.rho = static_cast<double>(sums.total[j]) / m;
    e.rho_per_property.resize(d);
    for (std::size_t i = 0; i < d; ++i) e.rho_per_property[i] = static_cast<double>(sums.per_property[j * d + i]) / m;
    e.nu = to_double_scaled(sums.value[j], 64) / m;
    const double var_r = std::max(0.0, static_cast<double>(sums.total_sq[j]) / m - e.rho * e.rho);
    const double mean_v_coarse = to_double_scaled(sums.value[j], 64) / m;
    const double var_v = std::max(0.0, to_double_scaled(sums.value_sq[j], 64) / m - mean_v_coarse * mean_v_coarse);
    const double bessel = m > 1 ? m / (m - 1) : 1.0;
    e.rho_se = std::sqrt(var_r * bessel / m);
    e.nu_se = std::sqrt(var_v * bessel / m);
    out.max_calibration_se = std::max({out.max_calibration_se, e.rho_se, e.nu_se});
  }

  // Deviation trials.
  out.records.resize(trials);
  parallel_for(trials, options.workers, [&](std::size_t t, std::size_t) {
    const Instance inst = sample_instance(dist, n, derive_seed(trial_seed(seed, t), "stream"));
    const auto evals = evaluate_policies(inst, spec, net);
    ConvergenceRecord rec;
    rec.trial = t;
    for (std::size_t j = 0; j < policies; ++j) {
      const PolicyEstimate& e = out.estimates[j];
      rec.max_dev_count = std::max(rec.max_dev_count, std::abs(static_cast<double>(evals[j].total) - e.rho));
      for (std::size_t i = 0; i < d; ++i) {
        rec.max_dev_count_per_property =
            std::max(rec.max_dev_count_per_property,
                     std::abs(static_cast<double>(evals[j].per_property[i]) - e.rho_per_property[i]));
      }
      rec.max_dev_value = std::max(rec.max_dev_value, std::abs(evals[j].value - e.nu));
    }
    out.records[t] = rec;
  });

  std::vector<double> dc, dp, dv;
  for (const ConvergenceRecord& r : out.records) {
    dc.push_back(r.max_dev_count);
    dp.push_back(r.max_dev_count_per_property);
    dv.push_back(r.max_dev_value);
  }
  out.count = quantiles(dc);
  out.count_per_property = quantiles(dp);
  out.value = quantiles(dv);
  out.retention_slack_unit = n > spec.k() ? retention_slack(spec.k(), d, n, options.delta, 1.0) : 0;
  out.value_slack_unit = value_slack(spec.k(), d, options.delta, 1.0);
  out.fitted_c0 = out.value.q95 / out.value_slack_unit;
  return out;
}

DistributionSpec lower_bound_distribution(std::size_t d) {
  if (d < 1) throw ConfigError("lower-bound distribution needs d >= 1");
  return DistributionSpec::disjoint_properties_uniform(d);
}

void write_aggregate_csv_row(std::ostream& os, const ExperimentConfig& cfg, const TrialStats& stats) {
  os << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", cfg.scenario, cfg.n, cfg.spec.k(), cfg.spec.d(),
                    cfg.delta, cfg.trials, stats.retained.mean, stats.retained.std, stats.success_rate,
                    stats.opt.mean, stats.opt.std, stats.max_dev_count, stats.max_dev_value);
}

void write_records_jsonl(std::ostream& os, const TrialStats& stats) {
  for (const TrialRecord& r : stats.records) {
    nlohmann::json j = {{"trial", r.trial},
                        {"seed", r.seed},
                        {"retained", r.retained},
                        {"retained_after_policy", r.retained_after_policy},
                        {"success", r.success},
                        {"opt", r.opt},
                        {"value", r.value}};
    os << j.dump() << '\n';
  }
}

}  // namespace screening
