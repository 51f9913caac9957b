#pragma once

#include <cstdint>
#include <random>

namespace anng {

using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seeds a generator from a user seed and an optional stream tag. Nearby
/// seeds (as produced by derive_seed) are decorrelated by the mixer.
inline Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
  return Engine{splitmix64(splitmix64(seed) + stream)};
}

/// Per-trial seed used by the experiment runner.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t ordinal) noexcept {
  return master ^ ordinal;
}

// Stream tags so that instance generation and query randomness never share
// a generator even when they are driven by the same seed.
inline constexpr std::uint64_t kInstanceStream = 0;
inline constexpr std::uint64_t kQueryStream = 1;
inline constexpr std::uint64_t kAuxStream = 2;

}  // namespace anng
