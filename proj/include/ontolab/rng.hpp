#pragma once

#include <cstdint>

namespace ontolab {

// Counter-based random numbers: every draw is a pure hash of
// (seed, stream, index), so results are independent of evaluation order
// and parallel samplers reproduce the serial stream exactly.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream,
                                     std::uint64_t index) {
  std::uint64_t k = splitmix64(seed ^ 0xD1B54A32D192ED03ULL);
  k = splitmix64(k ^ stream * 0x8CB92BA72F3D8DD7ULL);
  return splitmix64(k ^ index * 0x2545F4914F6CDD1DULL);
}

// Uniform double in [0, 1) with 53 random bits.
constexpr double counter_uniform(std::uint64_t seed, std::uint64_t stream,
                                 std::uint64_t index) {
  return static_cast<double>(counter_hash(seed, stream, index) >> 11) *
         0x1.0p-53;
}

}  // namespace ontolab
