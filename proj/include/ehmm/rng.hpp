#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>

#include "ehmm/errors.hpp"

namespace ehmm {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Seeded random stream addressed by a (seed, stream id) key. Child streams
// are derived by hashing the parent key with the child id, so a stream's draw
// sequence never depends on what its siblings or parent have consumed; that
// makes per-(chain, time step, purpose) streams safe to use concurrently and
// reproducible regardless of evaluation order.
//
// Draw conversions are pinned here rather than delegated to the std
// distribution classes, so the sequence for a given key is identical across
// standard library implementations.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(derive(derive(0x6a09e667f3bcc908ULL, seed), stream)),
        engine_(key_) {}

  // Substream `id`; a pure function of this stream's key, independent of any
  // draws already made.
  RngStream child(std::uint64_t id) const { return RngStream(key_, id, Tag{}); }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on {0, ..., n-1}; rejection sampling, no modulo bias.
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw UsageError("uniform_int: n must be positive");
    const std::uint64_t reject_below = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t v = next_u64();
      if (v >= reject_below) return v % n;
    }
  }

  // Standard normal via Box-Muller; consumes exactly two uniforms per call
  // (no cached spare, so the mapping from the uniform stream is stateless).
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Index draw proportional to nonnegative weights (not necessarily
  // normalized).
  std::size_t categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw NumericError("categorical: negative or NaN weight");
      total += w;
    }
    if (!(total > 0.0) || !std::isfinite(total))
      throw NumericError("categorical: weights sum to zero or overflow");
    const double u = uniform() * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] > 0.0) last_positive = i;
      acc += weights[i];
      if (u < acc) return i;
    }
    return last_positive;  // u == total up to rounding
  }

 private:
  struct Tag {};
  RngStream(std::uint64_t parent_key, std::uint64_t id, Tag)
      : key_(derive(parent_key, id)), engine_(key_) {}

  static std::uint64_t derive(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a ^ (0x9e3779b97f4a7c15ULL + (b << 1));
    detail::splitmix64(s);
    s ^= b;
    return detail::splitmix64(s);
  }

  std::uint64_t key_;
  std::mt19937_64 engine_;
};

}  // namespace ehmm
