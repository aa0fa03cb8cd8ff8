#pragma once

#include <cmath>
#include <cstdint>

// Counter-based random numbers. Every draw is a pure function of
// (seed, stream, counter), so replaying any subsequence never requires
// regenerating the rest of the stream, and runs that share a seed share
// noise draw-for-draw regardless of query order. All arithmetic is
// bit-exact across platforms (no std::normal_distribution, whose output
// is implementation-defined).

namespace batchkb::rng {

// Named streams carved out of one seed.
inline constexpr std::uint64_t kNoiseStream = 1;     // per-step observation noise
inline constexpr std::uint64_t kInstanceStream = 2;  // GP instance draws
inline constexpr std::uint64_t kTestStream = 7;      // scratch stream for tests

inline std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive(std::uint64_t seed, std::uint64_t stream,
                            std::uint64_t counter) {
  return splitmix(splitmix(splitmix(seed) ^ stream) ^ counter);
}

// Uniform in [0, 1) with 53 random bits.
inline double uniform01(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller; u1 is shifted into (0, 1] so the log is
// always finite.
inline double gaussian(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t counter) {
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  const std::uint64_t b1 = derive(seed, stream, 2 * counter);
  const std::uint64_t b2 = derive(seed, stream, 2 * counter + 1);
  const double u1 = (static_cast<double>(b1 >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = uniform01(b2);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

}  // namespace batchkb::rng
