#ifndef SAFEBO_NOISE_HPP
#define SAFEBO_NOISE_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace safebo {

// Counter-based Gaussian noise. Each draw is a pure function of
// (seed, run, step, channel), so Monte Carlo runs can execute in any order
// and on any number of threads while consuming identical noise, and all
// methods of a paired comparison replay the same per-run sequence.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix_key(std::uint64_t seed, std::uint64_t run, std::uint64_t step,
                                std::uint64_t channel) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ splitmix64(run + 0x6A09E667F3BCC909ULL));
  h = splitmix64(h ^ splitmix64(step + 0xBB67AE8584CAA73BULL));
  h = splitmix64(h ^ splitmix64(channel + 0x3C6EF372FE94F82BULL));
  return h;
}

/// Uniform in (0, 1], 53-bit resolution.
inline double uniform_from_bits(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1p-53;
}

/// Standard normal draw via Box-Muller on two hashed words.
inline double gaussian_noise(std::uint64_t seed, std::uint64_t run, std::uint64_t step,
                             std::uint64_t channel = 0) {
  const std::uint64_t key = mix_key(seed, run, step, channel);
  const double u = uniform_from_bits(key);
  const double v = uniform_from_bits(splitmix64(key ^ 0x9E3779B97F4A7C15ULL));
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

}  // namespace safebo

#endif  // SAFEBO_NOISE_HPP
