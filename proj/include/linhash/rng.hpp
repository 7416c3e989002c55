#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace linhash {

// All sampling draws raw 64-bit words from this engine and never goes through
// std::*_distribution, whose output is implementation-defined. Results are
// therefore reproducible across standard libraries.
using Rng = std::mt19937_64;

inline constexpr std::string_view kRngAlgorithm = "mt19937_64/splitmix64-substreams";

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream `stream` of the experiment seeded with `master_seed`.
// Depends only on the pair, never on which thread or in what order it is created.
inline Rng make_substream(std::uint64_t master_seed, std::uint64_t stream) {
  return Rng(splitmix64(splitmix64(master_seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
}

// Uniform integer in [0, n). Rejection sampling, so exact for every n > 0.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n + 1) % n;
  std::uint64_t x = rng();
  while (x > limit) x = rng();
  return x % n;
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace linhash
