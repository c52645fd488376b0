#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace cbma {

// SplitMix64 finalizer; used to derive well-separated child seeds from a
// master seed plus a handful of integer tags.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = splitmix64(master);
  for (std::uint64_t t : tags) {
    s = splitmix64(s ^ (t + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2)));
  }
  return s;
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
  return std::mt19937_64(splitmix64(seed));
}

}  // namespace cbma
