#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace beamlearn {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent sub-seed from a base seed and a tuple of indices,
/// e.g. (seed, snr index, trial index). Output depends only on the inputs, never
/// on which thread asks.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = mix64(seed);
  for (const auto p : path) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {}) {
  return std::mt19937_64(derive_seed(seed, path));
}

}  // namespace beamlearn
