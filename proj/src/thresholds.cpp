#include "screening/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <fmt/format.h>

#include "screening/matching.hpp"

namespace screening {

Threshold Threshold::at(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw ConfigError(fmt::format("threshold {} outside [0,1]", t));
  return Threshold(false, t);
}

ThresholdsPolicy ThresholdsPolicy::all_zero(std::size_t d) {
  return ThresholdsPolicy{std::vector<Threshold>(d, Threshold::at(0.0))};
}

ThresholdsPolicy ThresholdsPolicy::all_above(std::size_t d) {
  return ThresholdsPolicy{std::vector<Threshold>(d, Threshold::above())};
}

bool apply_policy(const ThresholdsPolicy& policy, const Item& item) {
  bool keep = false;
  for (const PropValue& pv : item.props) {
    if (pv.property >= policy.d()) {
      throw InputError(fmt::format("item {} has property {} but the policy covers {}", item.id, pv.property,
                                   policy.d()));
    }
    keep = keep || policy.t[pv.property].passes(pv.value);
  }
  return keep;
}

namespace {

ScreenResult screen(const ThresholdsPolicy& policy, const Instance& inst) {
  ScreenResult out;
  out.stats.per_property.assign(policy.d(), 0);
  for (const Item& item : inst.items) {
    bool keep = false;
    for (const PropValue& pv : item.props) {
      if (pv.property >= policy.d()) {
        throw InputError(fmt::format("item {} has property {} but the policy covers {}", item.id, pv.property,
                                     policy.d()));
      }
      if (policy.t[pv.property].passes(pv.value)) {
        ++out.stats.per_property[pv.property];
        keep = true;
      }
    }
    if (keep) out.retained.push_back(item);
  }
  out.stats.total = out.retained.size();
  return out;
}

}  // namespace

ScreenResult screen_with_policy(const ThresholdsPolicy& policy, const Instance& inst) {
  return screen(policy, inst);
}

ScreenResult screen_with_policy(const ThresholdsPolicy& policy, const Instance& inst, const ConstraintSpec& spec) {
  if (policy.d() != spec.d()) {
    throw ConfigError(fmt::format("policy has {} thresholds, spec has d = {}", policy.d(), spec.d()));
  }
  ScreenResult out = screen(policy, inst);
  out.stats.value = optimal_matching(out.retained, spec).value;
  return out;
}

ThresholdsPolicy learn_optimal_thresholds(const Instance& train, const ConstraintSpec& spec) {
  const Solution best = optimal_matching(train.items, spec);
  std::vector<std::optional<double>> weakest(spec.d());
  for (const Assignment& a : best.assignment) {
    if (is_dummy_id(a.item)) continue;
    const Item* item = a.item < train.size() && train.items[a.item].id == a.item ? &train.items[a.item] : nullptr;
    if (item == nullptr) {
      auto it = std::find_if(train.items.begin(), train.items.end(), [&](const Item& x) { return x.id == a.item; });
      item = &*it;
    }
    const double v = *item->value(a.property);
    auto& w = weakest[a.property];
    if (!w || v < *w) w = v;
  }
  ThresholdsPolicy policy;
  for (const auto& w : weakest) policy.t.push_back(Threshold::at(w.value_or(0.0)));
  return policy;
}

ThresholdsPolicy learn_topm_thresholds(const Instance& train, const ConstraintSpec& spec,
                                       std::span<const std::size_t> m) {
  if (m.size() != spec.d()) {
    throw ConfigError(fmt::format("need {} retention targets, got {}", spec.d(), m.size()));
  }
  ThresholdsPolicy policy;
  for (std::size_t p = 0; p < spec.d(); ++p) {
    if (m[p] < 1) throw ConfigError(fmt::format("retention target for property {} must be >= 1", p));
    std::vector<double> vals;
    for (const Item& item : train.items) {
      if (auto v = item.value(static_cast<PropertyIndex>(p))) vals.push_back(*v);
    }
    if (vals.size() < m[p]) {
      policy.t.push_back(Threshold::at(0.0));
      continue;
    }
    auto nth = vals.begin() + static_cast<std::ptrdiff_t>(m[p] - 1);
    std::nth_element(vals.begin(), nth, vals.end(), std::greater<>());
    policy.t.push_back(Threshold::at(*nth));
  }
  return policy;
}

std::size_t retention_slack(std::size_t k, std::size_t d, std::size_t n, double delta, double c0) {
  if (c0 == 0.0) return 0;
  if (k < 1 || d < 1 || n <= k || !(delta > 0.0 && delta <= 1.0) || !(c0 >= 0.0)) {
    throw ConfigError(fmt::format("retention_slack needs k >= 1, d >= 1, n > k, 0 < delta <= 1, c0 >= 0 "
                                  "(k={}, d={}, n={}, delta={}, c0={})",
                                  k, d, n, delta, c0));
  }
  const double kk = static_cast<double>(k);
  const double log_d = std::log(static_cast<double>(std::max<std::size_t>(d, 2)));
  const double log_nk = std::log(static_cast<double>(n) / kk);
  return static_cast<std::size_t>(std::ceil(c0 * std::sqrt(kk * (log_d * log_nk + std::log(1.0 / delta)))));
}

double value_slack(std::size_t k, std::size_t d, double delta, double c0) {
  if (c0 == 0.0) return 0.0;
  if (k < 1 || d < 1 || !(delta > 0.0 && delta <= 1.0) || !(c0 >= 0.0)) {
    throw ConfigError(fmt::format("value_slack needs k >= 1, d >= 1, 0 < delta <= 1, c0 >= 0 "
                                  "(k={}, d={}, delta={}, c0={})",
                                  k, d, delta, c0));
  }
  const double kk = static_cast<double>(k);
  const double log_k = std::log(static_cast<double>(std::max<std::size_t>(k, 2)));
  return c0 * std::sqrt(kk * (static_cast<double>(d) * log_k + std::log(1.0 / delta)));
}

std::vector<ThresholdsPolicy> quantile_policy_net(const Instance& train, const ConstraintSpec& spec,
                                                  std::size_t n, std::size_t k, NetOptions options) {
  const std::size_t d = spec.d();
  if (train.empty()) return {ThresholdsPolicy::all_zero(d)};
  if (n < 1 || k < 1) throw ConfigError("quantile_policy_net needs n >= 1 and k >= 1");

  const double train_size = static_cast<double>(train.size());
  const double mass_unit = static_cast<double>(d) * static_cast<double>(n);
  const std::size_t max_step = 10 * d * k;

  std::vector<std::vector<Threshold>> axes(d);
  for (std::size_t p = 0; p < d; ++p) {
    std::vector<double> vals;
    for (const Item& item : train.items) {
      if (auto v = item.value(static_cast<PropertyIndex>(p))) vals.push_back(*v);
    }
    std::sort(vals.begin(), vals.end(), std::greater<>());
    auto& axis = axes[p];
    axis.push_back(Threshold::above());
    for (std::size_t j = 1; j <= max_step; ++j) {
      // Rank of the training value with empirical mass j / (d n) at or above it.
      const auto rank = static_cast<std::size_t>(std::ceil(static_cast<double>(j) * train_size / mass_unit - 1e-9));
      if (rank < 1) continue;
      if (rank > vals.size()) break;
      const Threshold t = Threshold::at(vals[rank - 1]);
      if (axis.back() != t) axis.push_back(t);
    }
    if (axis.back() != Threshold::at(0.0)) axis.push_back(Threshold::at(0.0));
  }

  std::size_t size = 1;
  bool overflow = false;
  for (const auto& axis : axes) {
    if (size > options.max_size) overflow = true;
    size *= axis.size();
  }
  if (d > 2 && (overflow || size > options.max_size)) {
    throw RefusalError(overflow ? fmt::format("quantile net exceeds the cap of {} policies", options.max_size)
                                : fmt::format("quantile net needs a cap of at least {} (cap is {})", size,
                                              options.max_size));
  }

  std::vector<ThresholdsPolicy> net;
  net.reserve(size);
  std::vector<std::size_t> at(d, 0);
  while (true) {
    ThresholdsPolicy policy;
    for (std::size_t p = 0; p < d; ++p) policy.t.push_back(axes[p][at[p]]);
    net.push_back(std::move(policy));
    std::size_t p = d;
    while (p > 0) {
      --p;
      if (++at[p] < axes[p].size()) break;
      at[p] = 0;
      if (p == 0) return net;
    }
  }
}

}  // namespace screening
