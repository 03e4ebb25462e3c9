#include "screening/io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace screening {

using nlohmann::json;

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError(fmt::format("{}: cannot open file", path));
  return is;
}

template <typename Fn>
auto with_context(const std::string& where, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw InputError(fmt::format("{}: {}", where, e.what()));
  } catch (const ConfigError& e) {
    throw InputError(fmt::format("{}: {}", where, e.what()));
  }
}

}  // namespace

Instance parse_instance(std::istream& is, const std::string& source) {
  Instance inst;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = fmt::format("{}:{}", source, lineno);
    inst.items.push_back(with_context(where, [&] {
      const json j = json::parse(line);
      if (!j.is_object()) throw InputError(fmt::format("{}: expected an object", where));
      const auto id = j.at("id").get<ItemId>();
      std::vector<PropValue> props;
      for (const json& pv : j.at("props")) {
        if (!pv.is_array() || pv.size() != 2) throw InputError(fmt::format("{}: props entries are [p, v] pairs", where));
        props.push_back({pv[0].get<PropertyIndex>(), pv[1].get<double>()});
      }
      return Item(id, std::move(props));
    }));
  }
  return inst;
}

Instance read_instance(const std::string& path) {
  std::ifstream is = open_input(path);
  return parse_instance(is, path);
}

void write_instance(std::ostream& os, const Instance& inst) {
  for (const Item& item : inst.items) {
    std::string line = fmt::format("{{\"id\":{},\"props\":[", item.id);
    for (std::size_t i = 0; i < item.props.size(); ++i) {
      line += fmt::format("{}[{},{:.17g}]", i ? "," : "", item.props[i].property, item.props[i].value);
    }
    line += "]}\n";
    os << line;
  }
}

json read_json_file(const std::string& path) {
  std::ifstream is = open_input(path);
  return with_context(path, [&] { return json::parse(is); });
}

ConstraintSpec constraint_spec_from_json(const json& j) {
  return ConstraintSpec(j.at("caps").get<std::vector<std::uint32_t>>());
}

json to_json(const ConstraintSpec& spec) { return {{"caps", spec.caps()}}; }

ConstraintSpec read_constraint_spec(const std::string& path) {
  const json j = read_json_file(path);
  return with_context(path, [&] { return constraint_spec_from_json(j); });
}

DistributionSpec distribution_spec_from_json(const json& j) {
  const DistributionKind kind = distribution_kind_from_string(j.at("kind").get<std::string>());
  DistributionSpec dist;
  switch (kind) {
    case DistributionKind::kSinglePropertyUniform:
      dist = DistributionSpec::single_property_uniform();
      if (j.contains("d")) dist.d = j.at("d").get<std::size_t>();
      break;
    case DistributionKind::kDisjointPropertiesUniform:
      dist = DistributionSpec::disjoint_properties_uniform(j.at("d").get<std::size_t>());
      break;
    case DistributionKind::kOverlapBernoulli:
      dist = DistributionSpec::overlap_bernoulli(j.at("p").get<std::vector<double>>());
      if (j.contains("d") && j.at("d").get<std::size_t>() != dist.d) {
        throw ConfigError("\"d\" disagrees with the length of \"p\"");
      }
      break;
  }
  dist.validate();
  return dist;
}

json to_json(const DistributionSpec& dist) {
  json j = {{"kind", to_string(dist.kind)}, {"d", dist.d}};
  if (dist.kind == DistributionKind::kOverlapBernoulli) j["p"] = dist.membership;
  return j;
}

DistributionSpec read_distribution_spec(const std::string& path) {
  const json j = read_json_file(path);
  return with_context(path, [&] { return distribution_spec_from_json(j); });
}

ThresholdsPolicy policy_from_json(const json& j) {
  ThresholdsPolicy policy;
  for (const json& t : j.at("t")) {
    if (t.is_string()) {
      if (t.get<std::string>() != "ABOVE") throw ConfigError("threshold strings must be \"ABOVE\"");
      policy.t.push_back(Threshold::above());
    } else {
      policy.t.push_back(Threshold::at(t.get<double>()));
    }
  }
  if (policy.t.empty()) throw ConfigError("policy needs at least one threshold");
  return policy;
}

json to_json(const ThresholdsPolicy& policy) {
  json t = json::array();
  for (const Threshold& x : policy.t) {
    if (x.is_above()) {
      t.push_back("ABOVE");
    } else {
      t.push_back(x.value());
    }
  }
  return {{"t", t}};
}

ThresholdsPolicy read_policy(const std::string& path) {
  const json j = read_json_file(path);
  return with_context(path, [&] { return policy_from_json(j); });
}

json to_json(const Solution& sol) {
  json assignment = json::array();
  for (const Assignment& a : sol.assignment) assignment.push_back({a.item, a.property});
  return {{"value", sol.value}, {"assignment", assignment}};
}

json to_json(const GreedyResult& res) {
  return {{"warmup", res.warmup},
          {"retained", res.retained_ids.size()},
          {"retained_ids", res.retained_ids},
          {"final_solution", to_json(res.final_solution)}};
}

json to_json(const PipelineResult& res) {
  return {{"policy", to_json(res.policy)},
          {"warmup", res.warmup},
          {"retained_after_policy", res.retained_after_policy},
          {"retained_final", res.retained_final},
          {"retained_ids", res.retained_ids},
          {"final_solution", to_json(res.final_solution)},
          {"full_stream_value", res.full_stream_value},
          {"optimal_vs_fullstream", res.optimal_vs_fullstream},
          {"value_gap", res.value_gap}};
}

void write_trace_csv(std::ostream& os, const GreedyResult& res) {
  os << "step,item_id,retained,running_value\n";
  for (const GreedyStep& s : res.trace) {
    os << fmt::format("{},{},{},{:.17g}\n", s.step, s.item_id, s.retained ? 1 : 0, s.running_value);
  }
}

}  // namespace screening
