#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace permfdp {

using Engine = std::mt19937_64;

// SplitMix64 output function.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for the substream addressed by `path` under `root`. Substreams depend
// only on (root, path), never on the order in which they are requested.
constexpr std::uint64_t derive_seed(std::uint64_t root,
                                    std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t state = mix64(root);
  for (std::uint64_t p : path) state = mix64(state ^ mix64(p + 0x632be59bd9b4e019ULL));
  return state;
}

inline Engine substream(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
  return Engine(derive_seed(root, path));
}

// Stream tags keep independent consumers of one root seed apart.
namespace streams {
inline constexpr std::uint64_t kTransforms = 1;
inline constexpr std::uint64_t kSubsets = 2;
inline constexpr std::uint64_t kSimulation = 3;
}  // namespace streams

}  // namespace permfdp
