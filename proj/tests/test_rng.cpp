#include <doctest.h>

#include <set>

#include "screening/rng.hpp"

using namespace screening;

TEST_CASE("derive_seed separates purposes and indices") {
  std::set<std::uint64_t> seen;
  for (const char* label : {"trial", "stream", "train", "calibration"}) {
    for (std::uint64_t i = 0; i < 100; ++i) seen.insert(derive_seed(42, label, i));
  }
  CHECK(seen.size() == 400);
  CHECK(derive_seed(42, "trial", 3) == derive_seed(42, "trial", 3));
  CHECK(derive_seed(42, "trial", 3) != derive_seed(43, "trial", 3));
}

TEST_CASE("uniform01 range and below bounds") {
  Rng rng(7);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
  for (int i = 0; i < 1000; ++i) CHECK(rng.below(3) < 3);
}
