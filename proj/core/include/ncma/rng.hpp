#pragma once

#include <cstdint>
#include <random>

namespace ncma {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent substream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic per-trial stream keyed by (seed, point, trial).
inline Rng substream(std::uint64_t seed, std::uint64_t point, std::uint64_t trial) {
  const std::uint64_t k = mix64(mix64(mix64(seed) ^ point) ^ trial);
  std::seed_seq seq{static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32),
                    static_cast<std::uint32_t>(point), static_cast<std::uint32_t>(trial)};
  return Rng(seq);
}

}  // namespace ncma
