#include "screening/cli.hpp"

#include <fstream>
#include <functional>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "screening/experiments.hpp"
#include "screening/greedy.hpp"
#include "screening/io.hpp"
#include "screening/matching.hpp"
#include "screening/pipeline.hpp"
#include "screening/rng.hpp"
#include "screening/thresholds.hpp"

namespace screening {

using nlohmann::json;

namespace {

struct Options {
  std::string in;
  std::string out;
  std::string spec;
  std::string dist;
  std::string train;
  std::string policy;
  std::string trace;
  std::string records;
  std::string mode;
  std::string algo = "greedy";
  std::string scenario = "default";
  std::uint64_t seed = kDefaultSeed;
  std::size_t n = 0;
  std::size_t trials = 1;
  std::size_t workers = 1;
  std::size_t calibration = 10;
  std::optional<std::size_t> stream_length;
  double delta = 0.1;
  double conv_delta = 0.05;
  double c0 = 1.0;
};

// Writes to `path`, or to `fallback` when the path is empty.
void emit(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& body) {
  if (path.empty()) {
    body(fallback);
    fallback.flush();
    return;
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InputError(fmt::format("{}: cannot open for writing", path));
  body(os);
  os.flush();
  if (!os) throw InputError(fmt::format("{}: write failed", path));
}

void emit_json(const std::string& path, std::ostream& fallback, const json& j) {
  emit(path, fallback, [&](std::ostream& os) { os << j.dump() << '\n'; });
}

void check_instance(const std::string& path, const Instance& inst, const ConstraintSpec& spec) {
  const ValidationReport report = validate_instance(inst, spec);
  if (!report.empty()) {
    const Violation& v = report.front();
    throw InputError(fmt::format("{}:{}: {}", path, v.position + 1, v.message));
  }
}

// Input files are read before the spec so a missing input is reported first.
std::pair<Instance, ConstraintSpec> load_input(const std::string& path, const std::string& spec_path) {
  Instance inst = read_instance(path);
  ConstraintSpec spec = read_constraint_spec(spec_path);
  check_instance(path, inst, spec);
  return {std::move(inst), std::move(spec)};
}

json summary_json(const Summary& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"max", s.max}};
}

json quantiles_json(const Quantiles& q) {
  return {{"q50", q.q50}, {"q90", q.q90}, {"q95", q.q95}, {"q99", q.q99}};
}

void cmd_gen(const Options& o, std::ostream& out) {
  const DistributionSpec dist = read_distribution_spec(o.dist);
  const Instance inst = sample_instance(dist, o.n, o.seed);
  emit(o.out, out, [&](std::ostream& os) { write_instance(os, inst); });
}

void cmd_solve(const Options& o, std::ostream& out) {
  const auto [inst, spec] = load_input(o.in, o.spec);
  emit_json(o.out, out, to_json(optimal_matching(inst.items, spec)));
}

void cmd_greedy(const Options& o, std::ostream& out) {
  const auto [inst, spec] = load_input(o.in, o.spec);
  GreedyOptions go;
  go.trace = !o.trace.empty();
  const GreedyResult res = greedy_screen(inst, spec, warmup_length(inst.size(), spec.k(), o.delta), go);
  if (go.trace) emit(o.trace, out, [&](std::ostream& os) { write_trace_csv(os, res); });
  emit_json(o.out, out, to_json(res));
}

PipelineConfig pipeline_config(const Options& o, PipelineMode fallback) {
  PipelineConfig cfg;
  cfg.mode = o.mode.empty() ? fallback : pipeline_mode_from_string(o.mode);
  cfg.delta = o.delta;
  cfg.c0 = o.c0;
  return cfg;
}

void cmd_learn(const Options& o, std::ostream& out) {
  const auto [train, spec] = load_input(o.in, o.spec);
  const PipelineConfig cfg = pipeline_config(o, PipelineMode::kValueApprox);
  const ThresholdsPolicy policy = learn_pipeline_policy(train, spec, cfg, o.stream_length.value_or(train.size()));
  emit_json(o.out, out, to_json(policy));
}

void cmd_screen(const Options& o, std::ostream& out) {
  const Instance inst = read_instance(o.in);
  const ThresholdsPolicy policy = read_policy(o.policy);
  std::optional<ConstraintSpec> spec;
  if (!o.spec.empty()) {
    spec = read_constraint_spec(o.spec);
    check_instance(o.in, inst, *spec);
  }
  const ScreenResult res = spec ? screen_with_policy(policy, inst, *spec) : screen_with_policy(policy, inst);
  json ids = json::array();
  for (const Item& item : res.retained) ids.push_back(item.id);
  json j = {{"retained_ids", ids}, {"per_property", res.stats.per_property}, {"total", res.stats.total}};
  if (res.stats.value) j["value"] = *res.stats.value;
  emit_json(o.out, out, j);
}

void cmd_pipeline(const Options& o, std::ostream& out) {
  const auto [stream, spec] = load_input(o.in, o.spec);
  const Instance train = read_instance(o.train);
  check_instance(o.train, train, spec);
  emit_json(o.out, out, to_json(run_pipeline(train, stream, spec, pipeline_config(o, PipelineMode::kExactOpt))));
}

void cmd_trials(const Options& o, std::ostream& out) {
  ExperimentConfig cfg;
  cfg.scenario = o.scenario;
  cfg.dist = read_distribution_spec(o.dist);
  cfg.spec = read_constraint_spec(o.spec);
  cfg.n = o.n;
  cfg.delta = o.delta;
  cfg.trials = o.trials;
  cfg.seed = o.seed;
  cfg.algorithm = algorithm_from_string(o.algo);
  cfg.c0 = o.c0;
  cfg.workers = o.workers;
  if (!o.policy.empty()) cfg.policy = read_policy(o.policy);
  const TrialStats stats = run_trials(cfg);
  if (!o.records.empty()) emit(o.records, out, [&](std::ostream& os) { write_records_jsonl(os, stats); });
  emit(o.out, out, [&](std::ostream& os) {
    os << kAggregateCsvHeader << '\n';
    write_aggregate_csv_row(os, cfg, stats);
  });
}

void cmd_concentration(const Options& o, std::ostream& out) {
  const DistributionSpec dist = read_distribution_spec(o.dist);
  const ConstraintSpec spec = read_constraint_spec(o.spec);
  const ConcentrationStats stats = concentration_experiment(dist, spec, o.n, o.trials, o.seed, o.workers);
  json tail = json::array();
  for (const TailRow& r : stats.tail) {
    tail.push_back({{"delta_prime", r.delta_prime},
                    {"alpha", r.alpha},
                    {"exceed_fraction", r.exceed_fraction},
                    {"bound", r.bound},
                    {"standard_error", r.standard_error}});
  }
  emit_json(o.out, out, {{"n", o.n}, {"k", spec.k()}, {"trials", o.trials}, {"opt", summary_json(stats.summary)},
                         {"tail", tail}});
}

void cmd_converge(const Options& o, std::ostream& out) {
  const DistributionSpec dist = read_distribution_spec(o.dist);
  const ConstraintSpec spec = read_constraint_spec(o.spec);
  if (dist.d != spec.d()) throw ConfigError("distribution and spec disagree on d");
  const Instance train = sample_instance(dist, o.n, derive_seed(o.seed, "net"));
  const auto net = quantile_policy_net(train, spec, o.n, spec.k());
  ConvergenceOptions co;
  co.calibration_factor = o.calibration;
  co.delta = o.conv_delta;
  co.workers = o.workers;
  const ConvergenceStats stats = convergence_experiment(dist, spec, o.n, o.trials, net, o.seed, co);
  if (!o.records.empty()) {
    emit(o.records, out, [&](std::ostream& os) {
      for (const ConvergenceRecord& r : stats.records) {
        os << json{{"trial", r.trial},
                   {"max_dev_count", r.max_dev_count},
                   {"max_dev_count_per_property", r.max_dev_count_per_property},
                   {"max_dev_value", r.max_dev_value}}
                  .dump()
           << '\n';
      }
    });
  }
  emit_json(o.out, out,
            {{"n", o.n},
             {"k", spec.k()},
             {"d", spec.d()},
             {"trials", o.trials},
             {"net_size", net.size()},
             {"max_calibration_se", stats.max_calibration_se},
             {"count", quantiles_json(stats.count)},
             {"count_per_property", quantiles_json(stats.count_per_property)},
             {"value", quantiles_json(stats.value)},
             {"retention_slack_unit", stats.retention_slack_unit},
             {"value_slack_unit", stats.value_slack_unit},
             {"fitted_c0", stats.fitted_c0}});
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Constrained online item screening", "oscreen"};
  app.require_subcommand(1, 1);
  app.set_config("--config", "", "TOML/INI file with option defaults; flags take precedence");
  app.failure_message(CLI::FailureMessage::help);

  auto seed_opt = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, fmt::format("Root seed (default {})", kDefaultSeed));
  };
  auto out_opt = [&](CLI::App* sub) { sub->add_option("--out", o.out, "Output file (default stdout)"); };
  auto unit = CLI::Range(0.0, 1.0);

  auto* gen = app.add_subcommand("gen", "Sample an instance as JSON Lines");
  gen->add_option("--dist", o.dist, "Distribution spec JSON")->required();
  gen->add_option("--n", o.n, "Number of items")->required();
  seed_opt(gen);
  out_opt(gen);

  auto* solve = app.add_subcommand("solve", "Offline optimum of an instance");
  solve->add_option("--in", o.in, "Instance JSONL")->required();
  solve->add_option("--spec", o.spec, "Constraint spec JSON")->required();
  out_opt(solve);

  auto* greedy = app.add_subcommand("greedy", "Greedy online screening");
  greedy->add_option("--in", o.in, "Instance JSONL")->required();
  greedy->add_option("--spec", o.spec, "Constraint spec JSON")->required();
  greedy->add_option("--delta", o.delta, "Failure probability; warmup = floor(delta n / k)")->check(unit);
  greedy->add_option("--trace", o.trace, "Write a per-step CSV trace here");
  out_opt(greedy);

  auto* learn = app.add_subcommand("learn", "Learn a thresholds policy from a training instance");
  learn->add_option("--in", o.in, "Training instance JSONL")->required();
  learn->add_option("--spec", o.spec, "Constraint spec JSON")->required();
  learn->add_option("--mode", o.mode, "value-approx (default) or exact-opt");
  learn->add_option("--n", o.stream_length, "Live stream length for exact-opt (default: training size)");
  learn->add_option("--delta", o.delta, "Failure probability");
  learn->add_option("--c0", o.c0, "Slack constant");
  out_opt(learn);

  auto* screen = app.add_subcommand("screen", "Apply a thresholds policy to an instance");
  screen->add_option("--in", o.in, "Instance JSONL")->required();
  screen->add_option("--policy", o.policy, "Policy JSON")->required();
  screen->add_option("--spec", o.spec, "Constraint spec JSON; adds the optimum value");
  out_opt(screen);

  auto* pipeline = app.add_subcommand("pipeline", "Policy filter followed by greedy screening");
  pipeline->add_option("--train", o.train, "Training instance JSONL")->required();
  pipeline->add_option("--in", o.in, "Live stream JSONL")->required();
  pipeline->add_option("--spec", o.spec, "Constraint spec JSON")->required();
  pipeline->add_option("--mode", o.mode, "exact-opt (default) or value-approx");
  pipeline->add_option("--delta", o.delta, "Failure probability");
  pipeline->add_option("--c0", o.c0, "Slack constant");
  out_opt(pipeline);

  auto* trials = app.add_subcommand("trials", "Monte Carlo trials of one algorithm");
  trials->add_option("--dist", o.dist, "Distribution spec JSON")->required();
  trials->add_option("--spec", o.spec, "Constraint spec JSON")->required();
  trials->add_option("--n", o.n, "Stream length")->required();
  trials->add_option("--delta", o.delta, "Failure probability");
  trials->add_option("--trials", o.trials, "Number of trials");
  trials->add_option("--algo", o.algo, "greedy, value-approx, exact-opt or policy-fixed");
  trials->add_option("--c0", o.c0, "Slack constant for the pipelines");
  trials->add_option("--policy", o.policy, "Policy JSON for policy-fixed");
  trials->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
  trials->add_option("--scenario", o.scenario, "Scenario label for the CSV row");
  trials->add_option("--records", o.records, "Per-trial JSONL records");
  seed_opt(trials);
  out_opt(trials);

  auto* conc = app.add_subcommand("concentration", "Distribution of OPT over sampled instances");
  conc->add_option("--dist", o.dist, "Distribution spec JSON")->required();
  conc->add_option("--spec", o.spec, "Constraint spec JSON")->required();
  conc->add_option("--n", o.n, "Instance size")->required();
  conc->add_option("--trials", o.trials, "Number of trials");
  conc->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
  seed_opt(conc);
  out_opt(conc);

  auto* conv = app.add_subcommand("converge", "Uniform convergence over the quantile policy net");
  conv->add_option("--dist", o.dist, "Distribution spec JSON")->required();
  conv->add_option("--spec", o.spec, "Constraint spec JSON")->required();
  conv->add_option("--n", o.n, "Instance size")->required();
  conv->add_option("--trials", o.trials, "Deviation trials");
  conv->add_option("--calibration", o.calibration, "Calibration trials per deviation trial")
      ->check(CLI::PositiveNumber);
  conv->add_option("--delta", o.conv_delta, "Confidence for the slack units")->check(unit);
  conv->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
  conv->add_option("--records", o.records, "Per-trial JSONL records");
  seed_opt(conv);
  out_opt(conv);

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return 2;
  }

  try {
    if (gen->parsed()) cmd_gen(o, out);
    else if (solve->parsed()) cmd_solve(o, out);
    else if (greedy->parsed()) cmd_greedy(o, out);
    else if (learn->parsed()) cmd_learn(o, out);
    else if (screen->parsed()) cmd_screen(o, out);
    else if (pipeline->parsed()) cmd_pipeline(o, out);
    else if (trials->parsed()) cmd_trials(o, out);
    else if (conc->parsed()) cmd_concentration(o, out);
    else if (conv->parsed()) cmd_converge(o, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const RefusalError& e) {
    err << "refused: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace screening
