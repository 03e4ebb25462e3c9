#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "screening/core.hpp"

namespace screening {

// A per-property retention threshold. `above()` retains nothing.
class Threshold {
 public:
  Threshold() = default;
  static Threshold above() { return Threshold(true, 1.0); }
  // Throws ConfigError unless t is in [0, 1].
  static Threshold at(double t);

  bool is_above() const { return above_; }
  double value() const { return t_; }
  bool passes(double v) const { return !above_ && v >= t_; }

  // Ordered by strictness; above() is the largest.
  friend bool operator==(const Threshold&, const Threshold&) = default;
  friend std::partial_ordering operator<=>(const Threshold& a, const Threshold& b) {
    if (a.above_ || b.above_) return a.above_ <=> b.above_;
    return a.t_ <=> b.t_;
  }

 private:
  Threshold(bool above, double t) : above_(above), t_(t) {}
  bool above_ = false;
  double t_ = 0.0;
};

struct ThresholdsPolicy {
  std::vector<Threshold> t;

  std::size_t d() const { return t.size(); }
  static ThresholdsPolicy all_zero(std::size_t d);
  static ThresholdsPolicy all_above(std::size_t d);

  friend bool operator==(const ThresholdsPolicy&, const ThresholdsPolicy&) = default;
};

// True iff some property of the item meets its threshold. Throws InputError
// if the item has a property outside the policy.
bool apply_policy(const ThresholdsPolicy& policy, const Item& item);

struct RetentionStats {
  std::vector<std::size_t> per_property;  // |R_i|
  std::size_t total = 0;                  // |union of R_i|
  std::optional<double> value;            // optimum over the retained items, when a spec is given
};

struct ScreenResult {
  std::vector<Item> retained;  // arrival order
  RetentionStats stats;
};

ScreenResult screen_with_policy(const ThresholdsPolicy& policy, const Instance& inst);
ScreenResult screen_with_policy(const ThresholdsPolicy& policy, const Instance& inst, const ConstraintSpec& spec);

// Thresholds at the weakest member of each property's share of the training
// optimum; 0 where that share is all dummies.
ThresholdsPolicy learn_optimal_thresholds(const Instance& train, const ConstraintSpec& spec);

// t_i = m_i-th largest training value of property i, or 0 if fewer exist.
ThresholdsPolicy learn_topm_thresholds(const Instance& train, const ConstraintSpec& spec,
                                       std::span<const std::size_t> m);

// ceil(c0 * sqrt(k * (ln(max(d,2)) * ln(n/k) + ln(1/delta)))).
std::size_t retention_slack(std::size_t k, std::size_t d, std::size_t n, double delta, double c0);

// c0 * sqrt(k * (d * ln(max(k,2)) + ln(1/delta))).
double value_slack(std::size_t k, std::size_t d, double delta, double c0);

struct NetOptions {
  // Enforced only for d > 2.
  std::size_t max_size = 200000;
};

// Per property: above(), thresholds at empirical mass steps j/(d*n) for
// j = 1..10*d*k (while the property has that much mass in `train`), and 0.
// Returns the Cartesian product, coordinate 0 outermost.
std::vector<ThresholdsPolicy> quantile_policy_net(const Instance& train, const ConstraintSpec& spec,
                                                  std::size_t n, std::size_t k, NetOptions options = {});

}  // namespace screening
