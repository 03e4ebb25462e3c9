#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace screening {

// Seed for an independent substream keyed by (root, purpose, index).
// Streams never depend on the order in which they are requested.
std::uint64_t derive_seed(std::uint64_t root, std::string_view purpose, std::uint64_t index = 0);

// Thin wrapper over mt19937_64. The standard distributions are not
// bit-reproducible across library implementations, so the conversions are
// spelled out here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1), a multiple of 2^-53.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound); bound > 0.
  std::uint64_t below(std::uint64_t bound);

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace screening
