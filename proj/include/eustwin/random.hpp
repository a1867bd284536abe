#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace eustwin {

using Engine = std::mt19937_64;

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed of the named substream `name`/`index` under `root`. Every random draw
/// in the toolkit comes from an engine seeded this way, so results do not
/// depend on the order in which substreams are consumed.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view name,
                                    std::uint64_t index = 0) {
  return mix64(mix64(root ^ fnv1a(name)) + index);
}

inline Engine make_engine(std::uint64_t root, std::string_view name,
                          std::uint64_t index = 0) {
  return Engine(derive_seed(root, name, index));
}

// Unbiased integer in [0, bound) from raw engine output; unlike
// std::uniform_int_distribution the sequence is identical across standard libraries.
inline std::uint64_t bounded(Engine& engine, std::uint64_t bound) {
  const std::uint64_t limit = Engine::max() - (Engine::max() % bound + 1) % bound;
  std::uint64_t v;
  do {
    v = engine();
  } while (v > limit);
  return v % bound;
}

}  // namespace eustwin
