#include "screening/greedy.hpp"

#include <cmath>

#include <fmt/format.h>

namespace screening {

std::size_t warmup_length(std::size_t n, std::size_t k, double delta) {
  if (k < 1) throw ConfigError("warmup_length needs k >= 1");
  if (!(delta >= 0.0 && delta <= 1.0)) throw ConfigError(fmt::format("delta {} outside [0,1]", delta));
  // The epsilon absorbs rounding when delta * n / k is an exact integer.
  const double w = std::floor(delta * static_cast<double>(n) / static_cast<double>(k) + 1e-9);
  return static_cast<std::size_t>(w);
}

GreedyScreener::GreedyScreener(const ConstraintSpec& spec)
    : spec_(spec), current_(optimal_matching_with_prices({}, spec)) {}

bool GreedyScreener::offer(const Item& item) {
  if (!current_.prices.may_enter(item)) return false;
  ++solves_;
  retained_.push_back(item);
  OptimumWithPrices next = optimal_matching_with_prices(retained_, spec_);
  if (!next.solution.contains(item.id)) {
    retained_.pop_back();
    return false;
  }
  current_ = std::move(next);
  return true;
}

GreedyResult greedy_screen(const Instance& stream, const ConstraintSpec& spec, std::size_t warmup,
                           GreedyOptions options) {
  if (warmup > stream.size()) {
    throw InputError(fmt::format("warmup {} exceeds stream length {}", warmup, stream.size()));
  }
  const ValidationReport report = validate_instance(stream, spec);
  if (!report.empty()) throw InputError(report.front().message);

  GreedyResult result;
  result.warmup = warmup;
  GreedyScreener screener(spec);
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const Item& item = stream.items[i];
    const bool kept = i >= warmup && screener.offer(item);
    if (kept) result.retained_ids.push_back(item.id);
    if (options.trace) result.trace.push_back({i, item.id, kept, screener.current().value});
  }
  result.final_solution = screener.current();
  return result;
}

}  // namespace screening
