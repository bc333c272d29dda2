// SPDX-License-Identifier: Apache-2.0
//
// Portable seeding and bounded draws. std distributions differ between
// standard libraries, so anything that must replay bit-for-bit goes through
// these helpers instead.
#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace ttscale {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Mixes a base seed with a purpose tag and any number of integer coordinates.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                                 std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = splitmix64(base ^ fnv1a(tag));
  for (auto p : parts) h = splitmix64(h ^ p);
  return h;
}

/// Unbiased draw in [0, bound) by rejection.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace ttscale
