#pragma once

#include <cstdint>

namespace gc {

// Counter-based random draws: every value is a pure function of (seed,
// counter), so parallel consumers can carve up counter ranges and produce
// results independent of scheduling. The mixer is the splitmix64 finalizer.
inline std::uint64_t rng_draw(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + (counter + 1) * 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Uniform double in [0, 1) with 53 random bits.
inline double rng_uniform(std::uint64_t seed, std::uint64_t counter) {
  return static_cast<double>(rng_draw(seed, counter) >> 11) * 0x1.0p-53;
}

}  // namespace gc
