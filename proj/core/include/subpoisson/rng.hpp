#pragma once

#include <cstdint>
#include <random>

namespace subpoisson {

/// splitmix64 step; used to derive independent stream seeds from a base seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for stream `index` derived from `base`. Streams with distinct indices
/// are independent for all practical purposes, so work split across workers by
/// index gives results independent of the thread schedule.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t s = base ^ (0x67e6c749a1a43fbdULL * (index + 1));
  splitmix64(s);
  return splitmix64(s);
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

}  // namespace subpoisson
