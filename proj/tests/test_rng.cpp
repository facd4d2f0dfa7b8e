#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <set>

#include "ontolab/rng.hpp"

using namespace ontolab;

// The generator is a pure function of (seed, stream, index), so the whole
// pipeline is usable in constant expressions.
static_assert(counter_hash(1, 2, 3) == counter_hash(1, 2, 3));
static_assert(counter_uniform(7, 0, 0) >= 0.0);
static_assert(counter_uniform(7, 0, 0) < 1.0);

TEST_CASE("splitmix64 avalanche separates adjacent inputs") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(splitmix64(i));
  CHECK(seen.size() == 1000);

  // Single-bit input changes flip roughly half the output bits.
  int flips = __builtin_popcountll(splitmix64(42) ^ splitmix64(43));
  CHECK(flips > 16);
  CHECK(flips < 48);
}

TEST_CASE("streams and indices address independent draws") {
  CHECK(counter_hash(5, 0, 0) != counter_hash(5, 0, 1));
  CHECK(counter_hash(5, 0, 0) != counter_hash(5, 1, 0));
  CHECK(counter_hash(5, 0, 0) != counter_hash(6, 0, 0));

  // Order independence: the draw at index k never depends on whether
  // other indices were evaluated (trivially true for a pure function,
  // pinned here as a regression guard on the signature).
  double before = counter_uniform(11, 3, 1000);
  for (std::uint64_t i = 0; i < 100; ++i) counter_uniform(11, 3, i);
  CHECK(counter_uniform(11, 3, 1000) == before);
}

TEST_CASE("uniform draws have the right moments") {
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0, lo = 1.0, hi = 0.0;
  for (int i = 0; i < n; ++i) {
    double u = counter_uniform(0xDEADBEEF, 7, static_cast<std::uint64_t>(i));
    sum += u;
    sumsq += u * u;
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  double mean = sum / n;
  double var = sumsq / n - mean * mean;
  // Standard error of the mean is ~0.00065; allow 4 sigma.
  CHECK(std::abs(mean - 0.5) < 0.0027);
  CHECK(std::abs(var - 1.0 / 12.0) < 0.003);
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
}
