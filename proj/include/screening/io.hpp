#pragma once

#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "screening/core.hpp"
#include "screening/greedy.hpp"
#include "screening/matching.hpp"
#include "screening/pipeline.hpp"
#include "screening/thresholds.hpp"

namespace screening {

// Instance files are JSON Lines: {"id": 0, "props": [[p, v], ...]}.
// Parse errors raise InputError naming `source` and the line number.
Instance parse_instance(std::istream& is, const std::string& source);
Instance read_instance(const std::string& path);
void write_instance(std::ostream& os, const Instance& inst);

ConstraintSpec constraint_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ConstraintSpec& spec);
ConstraintSpec read_constraint_spec(const std::string& path);

// {"kind": "...", "d": 2, "p": [...]}; "p" only for overlap-bernoulli.
DistributionSpec distribution_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DistributionSpec& dist);
DistributionSpec read_distribution_spec(const std::string& path);

// {"t": [0.5, "ABOVE", ...]}
ThresholdsPolicy policy_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ThresholdsPolicy& policy);
ThresholdsPolicy read_policy(const std::string& path);

nlohmann::json to_json(const Solution& sol);
nlohmann::json to_json(const GreedyResult& res);
nlohmann::json to_json(const PipelineResult& res);

void write_trace_csv(std::ostream& os, const GreedyResult& res);

// Reads a whole JSON document; InputError names the path.
nlohmann::json read_json_file(const std::string& path);

}  // namespace screening
