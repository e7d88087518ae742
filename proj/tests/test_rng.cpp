#include "dualcycle/rng.hpp"

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "doctest.h"

using dualcycle::RandomStream;

TEST_CASE("identical seeds replay the identical stream") {
  RandomStream a(12345);
  RandomStream b(12345);
  for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());

  RandomStream c(12346);
  RandomStream d(12345);
  bool any_diff = false;
  for (int i = 0; i < 100; ++i) any_diff |= (c.normal() != d.normal());
  CHECK(any_diff);
}

TEST_CASE("uniform draws stay inside the half-open unit interval") {
  RandomStream rng(7);
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal draws match standard moments") {
  // Fixed seed, n = 200000: SE(mean) ~ 0.0022, SE(var) ~ 0.0032. Bounds sit
  // at roughly four standard errors, and the frozen seed makes the check
  // deterministic rather than statistical.
  RandomStream rng(99);
  const int n = 200000;
  double sum = 0.0;
  double sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.009);
  CHECK(std::abs(var - 1.0) < 0.013);
}

TEST_CASE("normal_image shape and determinism") {
  RandomStream a(4);
  RandomStream b(4);
  const auto img1 = a.normal_image(3, 5, 2);
  const auto img2 = b.normal_image(3, 5, 2);
  CHECK(img1.height == 3);
  CHECK(img1.width == 5);
  CHECK(img1.channels == 2);
  CHECK(dualcycle::bitwise_equal(img1, img2));
}

TEST_CASE("derive_seed is pure and order-sensitive") {
  const uint64_t s1 = dualcycle::derive_seed(42, {1, 2, 3});
  const uint64_t s2 = dualcycle::derive_seed(42, {1, 2, 3});
  CHECK(s1 == s2);

  std::set<uint64_t> seen;
  seen.insert(dualcycle::derive_seed(42, {1, 2, 3}));
  seen.insert(dualcycle::derive_seed(42, {3, 2, 1}));
  seen.insert(dualcycle::derive_seed(42, {1, 2}));
  seen.insert(dualcycle::derive_seed(42, {1, 2, 0}));
  seen.insert(dualcycle::derive_seed(43, {1, 2, 3}));
  seen.insert(dualcycle::derive_seed(42, {}));
  CHECK(seen.size() == 6);
}

TEST_CASE("mix64 avalanches low-entropy inputs") {
  CHECK(dualcycle::mix64(0) != 0);
  CHECK(dualcycle::mix64(1) != 1);
  CHECK(dualcycle::mix64(0) != dualcycle::mix64(1));
  // Consecutive inputs should not produce consecutive outputs.
  CHECK(dualcycle::mix64(1) - dualcycle::mix64(0) != 1);
}
