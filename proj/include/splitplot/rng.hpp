#pragma once

#include <cstdint>
#include <random>

namespace splitplot {

/// Mixes a stream index into a base seed (splitmix64 finalizer). Used for
/// design-search starts and simulation replicates so each one owns an
/// independent, reproducible engine.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

using Engine = std::mt19937_64;

}  // namespace splitplot
