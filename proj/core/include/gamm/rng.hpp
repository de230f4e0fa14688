#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace gamm {

/// One SplitMix64 mixing round (Steele, Lea & Flood). Used as the seed mixer
/// for every stochastic component so reruns are bit-reproducible.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Substream derivation contract: fold each index into the master seed with
/// one SplitMix64 round per component. The result depends only on
/// (master, indices), never on thread scheduling or execution order.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> indices) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t ix : indices) {
    h = splitmix64(h ^ (ix + 0x9e3779b97f4a7c15ULL));
  }
  return h;
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
  return std::mt19937_64(splitmix64(seed));
}

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
/// Explicit scaling keeps the stream identical across standard libraries.
inline double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

}  // namespace gamm
