#pragma once

#include <cstddef>
#include <vector>

#include "screening/core.hpp"
#include "screening/matching.hpp"

namespace screening {

// floor(delta * n / k).
std::size_t warmup_length(std::size_t n, std::size_t k, double delta);

// Online retention: an offered item is kept iff it takes part in the optimum
// over everything kept so far plus itself. Kept items are never released.
class GreedyScreener {
 public:
  explicit GreedyScreener(const ConstraintSpec& spec);

  bool offer(const Item& item);

  const std::vector<Item>& retained() const { return retained_; }
  const Solution& current() const { return current_.solution; }
  // Offers that needed a full re-solve (the price test could not rule them out).
  std::size_t solves() const { return solves_; }

 private:
  ConstraintSpec spec_;
  std::vector<Item> retained_;
  OptimumWithPrices current_;
  std::size_t solves_ = 0;
};

struct GreedyStep {
  std::size_t step = 0;
  ItemId item_id = 0;
  bool retained = false;
  double running_value = 0.0;
};

struct GreedyResult {
  std::size_t warmup = 0;
  std::vector<ItemId> retained_ids;  // arrival order
  Solution final_solution;
  std::vector<GreedyStep> trace;     // filled when requested
};

struct GreedyOptions {
  bool trace = false;
};

// Discards the first `warmup` arrivals, then screens the rest with
// GreedyScreener. Throws InputError for invalid instances or warmup > n.
GreedyResult greedy_screen(const Instance& stream, const ConstraintSpec& spec, std::size_t warmup,
                           GreedyOptions options = {});

}  // namespace screening
