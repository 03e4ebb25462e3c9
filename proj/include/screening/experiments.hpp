#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "screening/core.hpp"
#include "screening/thresholds.hpp"

namespace screening {

inline constexpr std::uint64_t kDefaultSeed = 20190527;

// Confidence levels for the tail checks on OPT.
inline constexpr std::array<double, 4> kTailDeltaGrid = {0.2, 0.1, 0.05, 0.01};

enum class Algorithm {
  kGreedy,
  kPipelineValueApprox,
  kPipelineExactOpt,
  kPolicyFixed,
};

std::string to_string(Algorithm algorithm);
Algorithm algorithm_from_string(const std::string& name);

struct ExperimentConfig {
  std::string scenario = "default";
  DistributionSpec dist;
  ConstraintSpec spec{{1}};
  std::size_t n = 0;
  double delta = 0.1;
  std::size_t trials = 1;
  std::uint64_t seed = kDefaultSeed;
  Algorithm algorithm = Algorithm::kGreedy;
  double c0 = 1.0;                        // pipelines
  std::optional<ThresholdsPolicy> policy;  // policy-fixed
  std::size_t workers = 1;

  // Throws ConfigError on inconsistent settings.
  void validate() const;
};

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
  double min = 0.0;
  double max = 0.0;
};

Summary summarize(std::span<const double> xs);

struct TrialRecord {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::size_t retained = 0;               // items kept by the algorithm
  std::size_t retained_after_policy = 0;  // equals `retained` without a policy stage
  bool success = false;                   // output value equals OPT of the stream
  double opt = 0.0;
  double value = 0.0;
};

struct TrialStats {
  std::vector<TrialRecord> records;  // indexed by trial
  Summary retained;
  Summary opt;
  double success_rate = 0.0;
  double max_dev_count = 0.0;  // max |retained - mean retained|
  double max_dev_value = 0.0;  // max |OPT - mean OPT|
};

TrialStats run_trials(const ExperimentConfig& cfg);

// Recomputes the aggregate fields of `stats` from its records.
void aggregate(TrialStats& stats);

struct TailRow {
  double delta_prime = 0.0;
  double alpha = 0.0;            // sqrt(2 k ln(2 / delta'))
  double exceed_fraction = 0.0;  // fraction with |OPT - mean| >= alpha
  double bound = 0.0;            // 2 exp(-alpha^2 / (2k))
  double standard_error = 0.0;   // binomial SE at the bound
};

struct ConcentrationStats {
  std::vector<double> opt;  // per trial
  Summary summary;
  std::vector<TailRow> tail;
};

ConcentrationStats concentration_experiment(const DistributionSpec& dist, const ConstraintSpec& spec,
                                            std::size_t n, std::size_t trials, std::uint64_t seed,
                                            std::size_t workers = 1);

// |R_i^T|, |R^T| and V^T for every policy of a net on one instance.
struct PolicyEvaluation {
  std::vector<std::size_t> per_property;
  std::size_t total = 0;
  double value = 0.0;
};

std::vector<PolicyEvaluation> evaluate_policies(const Instance& inst, const ConstraintSpec& spec,
                                                std::span<const ThresholdsPolicy> net);

struct PolicyEstimate {
  double rho = 0.0;
  std::vector<double> rho_per_property;
  double nu = 0.0;
  double rho_se = 0.0;
  double nu_se = 0.0;
};

struct ConvergenceRecord {
  std::size_t trial = 0;
  double max_dev_count = 0.0;               // max over the net of ||R^T| - rho^T|
  double max_dev_count_per_property = 0.0;  // max over the net and i of ||R_i^T| - rho_i^T|
  double max_dev_value = 0.0;               // max over the net of |V^T - nu^T|
};

struct Quantiles {
  double q50 = 0.0;
  double q90 = 0.0;
  double q95 = 0.0;
  double q99 = 0.0;
};

Quantiles quantiles(std::vector<double> xs);

struct ConvergenceOptions {
  std::size_t calibration_factor = 10;
  double delta = 0.05;
  std::size_t workers = 1;
  std::size_t max_policies = 200000;
};

struct ConvergenceStats {
  std::vector<PolicyEstimate> estimates;  // aligned with the net
  std::vector<ConvergenceRecord> records;
  Quantiles count;
  Quantiles count_per_property;
  Quantiles value;
  double max_calibration_se = 0.0;
  std::size_t retention_slack_unit = 0;  // retention_slack(k, d, n, delta, 1); 0 when n <= k
  double value_slack_unit = 0.0;         // value_slack(k, d, delta, 1)
  double fitted_c0 = 0.0;                // smallest c0 covering 95% of value deviations
};

ConvergenceStats convergence_experiment(const DistributionSpec& dist, const ConstraintSpec& spec, std::size_t n,
                                        std::size_t trials, std::span<const ThresholdsPolicy> net,
                                        std::uint64_t seed, ConvergenceOptions options = {});

// The distribution behind the d-property lower-bound scenario: each item has
// exactly one of d equiprobable properties with a uniform value.
DistributionSpec lower_bound_distribution(std::size_t d);

inline constexpr const char* kAggregateCsvHeader =
    "scenario,n,k,d,delta,trials,mean_retained,std_retained,success_rate,mean_opt,std_opt,max_dev_count,"
    "max_dev_value";

void write_aggregate_csv_row(std::ostream& os, const ExperimentConfig& cfg, const TrialStats& stats);
void write_records_jsonl(std::ostream& os, const TrialStats& stats);

}  // namespace screening
