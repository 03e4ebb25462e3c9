#include "screening/core.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <fmt/format.h>

#include "screening/rng.hpp"

namespace screening {

Item::Item(ItemId id, std::vector<PropValue> props) : id(id), props(std::move(props)) {
  std::stable_sort(this->props.begin(), this->props.end(),
                   [](const PropValue& a, const PropValue& b) { return a.property < b.property; });
}

std::optional<double> Item::value(PropertyIndex p) const {
  auto it = std::lower_bound(props.begin(), props.end(), p,
                             [](const PropValue& pv, PropertyIndex q) { return pv.property < q; });
  if (it == props.end() || it->property != p) return std::nullopt;
  return it->value;
}

ConstraintSpec::ConstraintSpec(std::vector<std::uint32_t> caps) : caps_(std::move(caps)) {
  if (caps_.empty()) throw ConfigError("constraint spec needs at least one property");
  for (std::size_t i = 0; i < caps_.size(); ++i) {
    if (caps_[i] < 1) throw ConfigError(fmt::format("capacity of property {} must be >= 1", i));
    k_ += caps_[i];
  }
}

DistributionSpec DistributionSpec::single_property_uniform() {
  return DistributionSpec{DistributionKind::kSinglePropertyUniform, 1, {}};
}

DistributionSpec DistributionSpec::disjoint_properties_uniform(std::size_t d) {
  return DistributionSpec{DistributionKind::kDisjointPropertiesUniform, d, {}};
}

DistributionSpec DistributionSpec::overlap_bernoulli(std::vector<double> membership) {
  const std::size_t d = membership.size();
  return DistributionSpec{DistributionKind::kOverlapBernoulli, d, std::move(membership)};
}

void DistributionSpec::validate() const {
  if (d < 1) throw ConfigError("distribution needs d >= 1");
  switch (kind) {
    case DistributionKind::kSinglePropertyUniform:
      if (d != 1) throw ConfigError("single-property-uniform requires d = 1");
      break;
    case DistributionKind::kDisjointPropertiesUniform:
      break;
    case DistributionKind::kOverlapBernoulli: {
      if (membership.size() != d) {
        throw ConfigError(
            fmt::format("overlap-bernoulli needs {} membership probabilities, got {}", d,
                        membership.size()));
      }
      bool any_positive = false;
      for (double p : membership) {
        if (!(p >= 0.0 && p <= 1.0)) {
          throw ConfigError(fmt::format("membership probability {} outside [0,1]", p));
        }
        any_positive = any_positive || p > 0.0;
      }
      // Resampling empty memberships would never terminate.
      if (!any_positive) throw ConfigError("overlap-bernoulli needs a positive membership probability");
      break;
    }
  }
}

std::string to_string(DistributionKind kind) {
  switch (kind) {
    case DistributionKind::kSinglePropertyUniform:
      return "single-property-uniform";
    case DistributionKind::kDisjointPropertiesUniform:
      return "disjoint-properties-uniform";
    case DistributionKind::kOverlapBernoulli:
      return "overlap-bernoulli";
  }
  return "unknown";
}

DistributionKind distribution_kind_from_string(const std::string& name) {
  if (name == "single-property-uniform") return DistributionKind::kSinglePropertyUniform;
  if (name == "disjoint-properties-uniform") return DistributionKind::kDisjointPropertiesUniform;
  if (name == "overlap-bernoulli") return DistributionKind::kOverlapBernoulli;
  throw ConfigError(fmt::format("unknown distribution kind '{}'", name));
}

Instance sample_instance(const DistributionSpec& dist, std::size_t n, std::uint64_t seed) {
  dist.validate();
  Rng rng(seed);
  Instance inst;
  inst.items.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<PropValue> props;
    switch (dist.kind) {
      case DistributionKind::kSinglePropertyUniform:
        props.push_back({0, rng.uniform01()});
        break;
      case DistributionKind::kDisjointPropertiesUniform: {
        const auto p = static_cast<PropertyIndex>(rng.below(dist.d));
        props.push_back({p, rng.uniform01()});
        break;
      }
      case DistributionKind::kOverlapBernoulli:
        while (props.empty()) {
          for (std::size_t p = 0; p < dist.d; ++p) {
            if (rng.bernoulli(dist.membership[p])) {
              props.push_back({static_cast<PropertyIndex>(p), rng.uniform01()});
            }
          }
        }
        break;
    }
    inst.items.emplace_back(static_cast<ItemId>(i), std::move(props));
  }
  return inst;
}

std::vector<Item> dummy_items(const ConstraintSpec& spec) {
  std::vector<PropValue> all;
  all.reserve(spec.d());
  for (std::size_t p = 0; p < spec.d(); ++p) all.push_back({static_cast<PropertyIndex>(p), 0.0});
  std::vector<Item> out;
  out.reserve(spec.k());
  for (std::size_t j = 0; j < spec.k(); ++j) out.emplace_back(kDummyIdBase + j, all);
  return out;
}

std::string to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kValueOutOfRange:
      return "value out of range";
    case ViolationKind::kUnknownProperty:
      return "unknown property";
    case ViolationKind::kDuplicateId:
      return "duplicate id";
    case ViolationKind::kEmptyProps:
      return "empty props";
    case ViolationKind::kIdNotArrivalIndex:
      return "id is not the arrival index";
    case ViolationKind::kDuplicateProperty:
      return "duplicate property";
    case ViolationKind::kDummyInInstance:
      return "dummy id in instance";
  }
  return "unknown";
}

ValidationReport validate_items(std::span<const Item> items, const ConstraintSpec& spec,
                                bool allow_dummies) {
  ValidationReport report;
  auto add = [&](ViolationKind kind, std::size_t pos, const Item& item, std::string detail) {
    report.push_back({kind, pos, item.id,
                      fmt::format("item {} (position {}): {}{}", item.id, pos, to_string(kind),
                                  detail.empty() ? "" : ": " + detail)});
  };

  std::unordered_set<ItemId> seen;
  for (std::size_t pos = 0; pos < items.size(); ++pos) {
    const Item& item = items[pos];
    if (!seen.insert(item.id).second) add(ViolationKind::kDuplicateId, pos, item, "");
    if (!allow_dummies && is_dummy_id(item.id)) add(ViolationKind::kDummyInInstance, pos, item, "");
    if (item.props.empty()) add(ViolationKind::kEmptyProps, pos, item, "");
    for (std::size_t j = 0; j < item.props.size(); ++j) {
      const PropValue& pv = item.props[j];
      if (pv.property >= spec.d()) {
        add(ViolationKind::kUnknownProperty, pos, item,
            fmt::format("property {} but d = {}", pv.property, spec.d()));
      }
      if (!std::isfinite(pv.value) || pv.value < 0.0 || pv.value > 1.0) {
        add(ViolationKind::kValueOutOfRange, pos, item,
            fmt::format("property {} has value {}", pv.property, pv.value));
      }
      if (j > 0 && item.props[j - 1].property == pv.property) {
        add(ViolationKind::kDuplicateProperty, pos, item, fmt::format("property {}", pv.property));
      }
    }
  }
  return report;
}

ValidationReport validate_instance(const Instance& inst, const ConstraintSpec& spec) {
  ValidationReport report = validate_items(inst.items, spec, false);
  for (std::size_t pos = 0; pos < inst.items.size(); ++pos) {
    const Item& item = inst.items[pos];
    if (item.id != pos) {
      report.push_back({ViolationKind::kIdNotArrivalIndex, pos, item.id,
                        fmt::format("item {} (position {}): {}", item.id, pos,
                                    to_string(ViolationKind::kIdNotArrivalIndex))});
    }
  }
  return report;
}

}  // namespace screening
