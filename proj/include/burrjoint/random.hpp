#pragma once

#include <cstdint>
#include <random>

namespace burrjoint {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent generator for (root seed, stream, substream). Streams derived
/// this way depend only on their indices, never on scheduling.
inline Rng make_stream(std::uint64_t root, std::uint64_t stream, std::uint64_t substream = 0) {
  const std::uint64_t a = splitmix64(root ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
  const std::uint64_t b = splitmix64(a ^ splitmix64(substream + 0x85157af5ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Rng(seq);
}

/// Uniform draw on the open interval (0, 1).
inline double uniform_open(Rng& rng) {
  for (;;) {
    const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
    if (u > 0.0 && u < 1.0) return u;
  }
}

/// Gamma(shape, rate) draw.
inline double gamma_draw(Rng& rng, double shape, double rate) {
  std::gamma_distribution<double> dist(shape, 1.0 / rate);
  return dist(rng);
}

}  // namespace burrjoint
