#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "screening/core.hpp"
#include "screening/matching.hpp"
#include "screening/rng.hpp"

namespace testing_support {

using namespace screening;

// Random small case: caps in [1, ..], d <= max_d, k <= max_k, n <= max_n.
// With `coarse`, values come from a 4-point grid so ties are frequent.
struct SmallCase {
  ConstraintSpec spec{{1}};
  Instance inst;
};

inline SmallCase random_case(Rng& rng, std::size_t max_n, std::size_t max_d, std::size_t max_k, bool coarse) {
  const std::size_t d = 1 + rng.below(max_d);
  const std::size_t k = d + rng.below(max_k - d + 1);
  std::vector<std::uint32_t> caps(d, 1);
  for (std::size_t extra = k - d; extra > 0; --extra) ++caps[rng.below(d)];
  SmallCase c{ConstraintSpec(caps), {}};
  const std::size_t n = rng.below(max_n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<PropValue> props;
    while (props.empty()) {
      for (std::size_t p = 0; p < d; ++p) {
        if (rng.bernoulli(0.6)) {
          const double v = coarse ? static_cast<double>(rng.below(4)) / 4.0 : rng.uniform01();
          props.push_back({static_cast<PropertyIndex>(p), v});
        }
      }
    }
    c.inst.items.emplace_back(i, std::move(props));
  }
  return c;
}

// Feasibility of a solution against the items it draws from.
inline bool feasible(const Solution& sol, const std::vector<Item>& items, const ConstraintSpec& spec) {
  if (sol.assignment.size() != spec.k()) return false;
  std::vector<std::size_t> used(spec.d(), 0);
  for (std::size_t i = 0; i < sol.assignment.size(); ++i) {
    const Assignment& a = sol.assignment[i];
    if (a.property >= spec.d()) return false;
    if (i > 0 && !(sol.assignment[i - 1].item < a.item)) return false;
    ++used[a.property];
    if (is_dummy_id(a.item)) continue;
    auto it = std::find_if(items.begin(), items.end(), [&](const Item& x) { return x.id == a.item; });
    if (it == items.end() || !it->has(a.property)) return false;
  }
  for (std::size_t p = 0; p < spec.d(); ++p) {
    if (used[p] != spec.cap(static_cast<PropertyIndex>(p))) return false;
  }
  return true;
}

}  // namespace testing_support
