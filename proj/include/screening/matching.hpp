#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "screening/core.hpp"

namespace screening {

// Values enter every solver decision as integers in units of 2^-64. This is
// exact for any value carrying at most 64 fractional bits, which covers all
// sampled values (multiples of 2^-53) and every double >= 2^-11.
__int128 exact_value(double v);

// Lexicographic objective used inside the solvers: total exact value first,
// then the sum of matched real-item ids, then an auxiliary count used to pin
// items while resolving ties.
struct ObjectiveKey {
  __int128 value = 0;
  __int128 id_sum = 0;
  std::int64_t aux = 0;

  friend ObjectiveKey operator+(const ObjectiveKey& a, const ObjectiveKey& b) {
    return {a.value + b.value, a.id_sum + b.id_sum, a.aux + b.aux};
  }
  friend ObjectiveKey operator-(const ObjectiveKey& a, const ObjectiveKey& b) {
    return {a.value - b.value, a.id_sum - b.id_sum, a.aux - b.aux};
  }
  ObjectiveKey operator-() const { return {-value, -id_sum, -aux}; }
  friend bool operator==(const ObjectiveKey&, const ObjectiveKey&) = default;
  friend std::strong_ordering operator<=>(const ObjectiveKey& a, const ObjectiveKey& b) {
    if (a.value != b.value) return a.value < b.value ? std::strong_ordering::less : std::strong_ordering::greater;
    if (a.id_sum != b.id_sum) return a.id_sum < b.id_sum ? std::strong_ordering::less : std::strong_ordering::greater;
    return a.aux <=> b.aux;
  }
};

// Contribution of matching `id` to property with value `v`.
inline ObjectiveKey item_key(ItemId id, double v) {
  return {exact_value(v), is_dummy_id(id) ? 0 : static_cast<__int128>(id), 0};
}

struct Assignment {
  ItemId item = 0;
  PropertyIndex property = 0;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct Solution {
  std::vector<Assignment> assignment;  // sorted by item id; dummies last
  double value = 0.0;

  bool contains(ItemId id) const;
  std::optional<PropertyIndex> property_of(ItemId id) const;
  std::vector<std::vector<ItemId>> per_property(std::size_t d) const;
  std::size_t real_count() const;
  std::vector<ItemId> real_ids() const;

  friend bool operator==(const Solution&, const Solution&) = default;
};

// Maximum-value saturated assignment of items (plus k implicit dummies) to
// property slots. Among maximum-value solutions the one maximizing the sum of
// matched real ids wins; remaining ties go to the lexicographically smallest
// sorted id sequence (dummies included), then to the lexicographically
// smallest property sequence listed by increasing id. Throws InputError for
// property indices >= d.
Solution optimal_matching(std::span<const Item> items, const ConstraintSpec& spec);

// Exhaustive oracle with the same total order. Refuses (RefusalError) beyond
// 10 items or k > 5.
Solution brute_force_matching(std::span<const Item> items, const ConstraintSpec& spec);

inline constexpr std::size_t kBruteForceMaxItems = 10;
inline constexpr std::size_t kBruteForceMaxK = 5;

// Dual prices of an optimum. A candidate whose key is strictly below the
// price of every property it has cannot be part of any optimum after it is
// added to the item set.
class EntryPrices {
 public:
  EntryPrices() = default;
  explicit EntryPrices(std::vector<ObjectiveKey> prices) : prices_(std::move(prices)) {}

  bool may_enter(const Item& candidate) const;
  const std::vector<ObjectiveKey>& prices() const { return prices_; }

 private:
  std::vector<ObjectiveKey> prices_;
};

struct OptimumWithPrices {
  Solution solution;
  EntryPrices prices;
};

OptimumWithPrices optimal_matching_with_prices(std::span<const Item> items, const ConstraintSpec& spec);

// Exact total of a solution over an instance (ids are arrival positions).
__int128 exact_solution_value(const Solution& sol, const Instance& inst);

// Recomputes the value of `sol` from the items; throws InputError if `sol`
// violates feasibility (capacity counts, membership, duplicates).
double recompute_value(const Solution& sol, std::span<const Item> items, const ConstraintSpec& spec);

}  // namespace screening
