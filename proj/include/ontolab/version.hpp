#pragma once

#include <cstdint>

namespace ontolab {

inline constexpr const char* kLibraryVersion = "1.0.0";

// Version tag carried by every serialized report (JSON and CSV) so that
// downstream tooling can detect format changes.
inline constexpr int kSchemaVersion = 1;

// Fixed default seed for every stochastic routine.  Never derived from
// time: identical configurations must reproduce identical bytes.
inline constexpr std::uint64_t kDefaultSeed = 0x0f1ab5eedULL;

}  // namespace ontolab
