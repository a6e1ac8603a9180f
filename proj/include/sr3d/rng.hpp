#ifndef SR3D_RNG_HPP_
#define SR3D_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>

// Deterministic sampling helpers on top of std::mt19937_64.
//
// The standard <random> distributions are implementation-defined, so the same
// seed can produce different streams across standard libraries. Everything
// here is specified down to the bit so that seeded runs are byte-stable on
// any platform.

namespace sr3d {

// splitmix64 finalizer; also used to derive child seeds from a root seed.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ mix64(b));
}

// Per-scene seed scheme: seed_scene = mix64(root_seed, index).
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  return mix64(root, index);
}

// Uniform double in [0, 1) from the high 53 bits of one engine draw.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_range(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

// Uniform integer in [lo, hi] inclusive, unbiased via rejection.
inline std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo,
                                std::int64_t hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return lo + static_cast<std::int64_t>(rng());  // full range
  const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return lo + static_cast<std::int64_t>(draw % span);
}

// Standard normal via Box-Muller. Stateless: two uniforms per call, the
// second branch of the pair is discarded.
inline double normal_unit(std::mt19937_64& rng) {
  double u1 = uniform_unit(rng);
  const double u2 = uniform_unit(rng);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

inline double normal(std::mt19937_64& rng, double mean, double stddev) {
  return mean + stddev * normal_unit(rng);
}

}  // namespace sr3d

#endif  // SR3D_RNG_HPP_
