#include "screening/pipeline.hpp"

#include <cmath>

#include <fmt/format.h>

#include "screening/greedy.hpp"

namespace screening {

std::string to_string(PipelineMode mode) {
  return mode == PipelineMode::kValueApprox ? "value-approx" : "exact-opt";
}

PipelineMode pipeline_mode_from_string(const std::string& name) {
  if (name == "value-approx") return PipelineMode::kValueApprox;
  if (name == "exact-opt") return PipelineMode::kExactOpt;
  throw ConfigError(fmt::format("unknown pipeline mode '{}'", name));
}

void PipelineConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError(fmt::format("delta {} outside (0,1)", delta));
  if (!(c0 >= 0.0) || !std::isfinite(c0)) throw ConfigError(fmt::format("c0 {} must be >= 0", c0));
  const double w[] = {split.coverage, split.convergence, split.greedy};
  for (double x : w) {
    if (!(x >= 0.0)) throw ConfigError("delta split weights must be nonnegative");
  }
  if (std::abs(w[0] + w[1] + w[2] - 1.0) > 1e-12) throw ConfigError("delta split weights must sum to 1");
}

ThresholdsPolicy learn_pipeline_policy(const Instance& train, const ConstraintSpec& spec,
                                       const PipelineConfig& cfg, std::size_t stream_length) {
  cfg.validate();
  if (cfg.mode == PipelineMode::kValueApprox) return learn_optimal_thresholds(train, spec);
  const std::size_t k = spec.k();
  const double delta_conv = cfg.delta * cfg.split.convergence;
  const std::size_t slack = stream_length > k && delta_conv > 0.0
                                ? retention_slack(k, spec.d(), stream_length, delta_conv, cfg.c0)
                                : 0;
  const std::vector<std::size_t> m(spec.d(), k + slack);
  return learn_topm_thresholds(train, spec, m);
}

PipelineResult run_pipeline(const Instance& train, const Instance& stream, const ConstraintSpec& spec,
                            const PipelineConfig& cfg) {
  cfg.validate();
  for (const Instance* inst : {&train, &stream}) {
    const ValidationReport report = validate_instance(*inst, spec);
    if (!report.empty()) {
      throw InputError(fmt::format("{} instance: {}", inst == &train ? "training" : "stream", report.front().message));
    }
  }

  PipelineResult out;
  out.policy = learn_pipeline_policy(train, spec, cfg, stream.size());
  out.warmup = warmup_length(stream.size(), spec.k(), cfg.delta * cfg.split.greedy);

  GreedyScreener screener(spec);
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const Item& item = stream.items[i];
    if (!apply_policy(out.policy, item)) continue;
    ++out.retained_after_policy;
    // Warmup is measured in stream positions, not in filtered arrivals.
    if (i < out.warmup) continue;
    if (screener.offer(item)) out.retained_ids.push_back(item.id);
  }
  out.retained_final = out.retained_ids.size();
  out.final_solution = screener.current();

  const Solution full = optimal_matching(stream.items, spec);
  out.full_stream_value = full.value;
  out.optimal_vs_fullstream = exact_solution_value(out.final_solution, stream) == exact_solution_value(full, stream);
  out.value_gap = full.value - out.final_solution.value;
  return out;
}

}  // namespace screening
