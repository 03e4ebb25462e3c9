#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace screening {

using ItemId = std::uint64_t;
using PropertyIndex = std::uint32_t;

// Dummy items live at the top of the id space so they never collide with
// arrival indices.
inline constexpr ItemId kDummyIdBase = ItemId{1} << 62;

inline constexpr bool is_dummy_id(ItemId id) { return id >= kDummyIdBase; }

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a request is well-formed but exceeds a configured size guard.
class RefusalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PropValue {
  PropertyIndex property = 0;
  double value = 0.0;

  friend bool operator==(const PropValue&, const PropValue&) = default;
};

struct Item {
  ItemId id = 0;
  std::vector<PropValue> props;  // sorted by property, no repeats

  Item() = default;
  Item(ItemId id, std::vector<PropValue> props);

  bool has(PropertyIndex p) const { return value(p).has_value(); }
  std::optional<double> value(PropertyIndex p) const;

  friend bool operator==(const Item&, const Item&) = default;
};

class ConstraintSpec {
 public:
  explicit ConstraintSpec(std::vector<std::uint32_t> caps);

  std::size_t d() const { return caps_.size(); }
  std::size_t k() const { return k_; }
  std::uint32_t cap(PropertyIndex p) const { return caps_.at(p); }
  const std::vector<std::uint32_t>& caps() const { return caps_; }

  friend bool operator==(const ConstraintSpec&, const ConstraintSpec&) = default;

 private:
  std::vector<std::uint32_t> caps_;
  std::size_t k_ = 0;
};

// Items in arrival order; ids equal positions.
struct Instance {
  std::vector<Item> items;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }

  friend bool operator==(const Instance&, const Instance&) = default;
};

enum class DistributionKind {
  kSinglePropertyUniform,
  kDisjointPropertiesUniform,
  kOverlapBernoulli,
};

struct DistributionSpec {
  DistributionKind kind = DistributionKind::kSinglePropertyUniform;
  std::size_t d = 1;
  // Per-property membership probabilities; overlap-bernoulli only.
  std::vector<double> membership;

  static DistributionSpec single_property_uniform();
  static DistributionSpec disjoint_properties_uniform(std::size_t d);
  static DistributionSpec overlap_bernoulli(std::vector<double> membership);

  // Throws ConfigError on bad parameters.
  void validate() const;

  friend bool operator==(const DistributionSpec&, const DistributionSpec&) = default;
};

std::string to_string(DistributionKind kind);
DistributionKind distribution_kind_from_string(const std::string& name);

Instance sample_instance(const DistributionSpec& dist, std::size_t n, std::uint64_t seed);

std::vector<Item> dummy_items(const ConstraintSpec& spec);

enum class ViolationKind {
  kValueOutOfRange,
  kUnknownProperty,
  kDuplicateId,
  kEmptyProps,
  kIdNotArrivalIndex,
  kDuplicateProperty,
  kDummyInInstance,
};

struct Violation {
  ViolationKind kind;
  std::size_t position = 0;  // index in the checked sequence
  ItemId item_id = 0;
  std::string message;
};

using ValidationReport = std::vector<Violation>;

std::string to_string(ViolationKind kind);

ValidationReport validate_instance(const Instance& inst, const ConstraintSpec& spec);

// Same checks without the instance-level ones (arrival-index ids, dummy
// exclusion); dummies pass when `allow_dummies` is set.
ValidationReport validate_items(std::span<const Item> items, const ConstraintSpec& spec,
                                bool allow_dummies);

}  // namespace screening
