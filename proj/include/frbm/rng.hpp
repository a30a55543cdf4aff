#pragma once

#include <cstdint>

namespace frbm {

// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed of path k under master seed s: splitmix64(s ^ splitmix64(k)).
// Part of the output contract: records carry this value in `path_seed`.
constexpr std::uint64_t split_seed(std::uint64_t master, std::uint64_t k) {
  return splitmix64(master ^ splitmix64(k));
}

}  // namespace frbm
