#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "screening/core.hpp"
#include "screening/matching.hpp"
#include "screening/thresholds.hpp"

namespace screening {

enum class PipelineMode {
  kValueApprox,  // policy from the training optimum
  kExactOpt,     // policy keeping the top k + slack of each property
};

std::string to_string(PipelineMode mode);
PipelineMode pipeline_mode_from_string(const std::string& name);

// Apportions the failure budget delta.
struct DeltaSplit {
  double coverage = 1.0 / 3.0;
  double convergence = 1.0 / 3.0;
  double greedy = 1.0 / 3.0;
};

struct PipelineConfig {
  PipelineMode mode = PipelineMode::kExactOpt;
  double delta = 0.1;
  double c0 = 1.0;
  DeltaSplit split;

  // Throws ConfigError.
  void validate() const;
};

struct PipelineResult {
  ThresholdsPolicy policy;
  std::size_t warmup = 0;
  std::size_t retained_after_policy = 0;
  std::size_t retained_final = 0;
  std::vector<ItemId> retained_ids;
  Solution final_solution;
  double full_stream_value = 0.0;
  bool optimal_vs_fullstream = false;
  double value_gap = 0.0;
};

// The policy the pipeline would learn from `train` for a live stream of
// length `stream_length`.
ThresholdsPolicy learn_pipeline_policy(const Instance& train, const ConstraintSpec& spec,
                                       const PipelineConfig& cfg, std::size_t stream_length);

PipelineResult run_pipeline(const Instance& train, const Instance& stream, const ConstraintSpec& spec,
                            const PipelineConfig& cfg);

}  // namespace screening
