#pragma once

// Deterministic PRNG stack. A 128-bit PCG engine is addressed by a plain
// (seed, stream_id) handle; every consumer rebuilds the engine from the
// handle, so a draw is a pure function of its handle regardless of thread
// layout. Distribution transforms (normal, gamma, beta) live here too.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string_view>

#include "epkn/errors.hpp"

namespace epkn::rng {

struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

// SplitMix64 finalizer: bijective 64-bit mix.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// FNV-1a over raw bytes, used to derive grid stream ids.
inline std::uint64_t hash_bytes(const void* data, std::size_t len,
                                std::uint64_t h = 14695981039346656037ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

// Stable stream id for an experiment grid point.
inline std::uint64_t grid_stream(std::string_view tag, double alpha,
                                 double lambda, std::int64_t n) {
  std::uint64_t h = hash_bytes(tag.data(), tag.size());
  h = hash_bytes(&alpha, sizeof alpha, h);
  h = hash_bytes(&lambda, sizeof lambda, h);
  h = hash_bytes(&n, sizeof n, h);
  return mix64(h);
}

// PCG64 XSL-RR. Distinct stream_ids select distinct (odd) increments, so
// streams never share a state orbit.
class Pcg64 {
 public:
  explicit Pcg64(RngStream s) {
    const u128 init_state =
        (u128(mix64(s.seed)) << 64) | mix64(s.seed ^ 0x5851f42d4c957f2dull);
    const u128 seq = (u128(mix64(s.stream_id ^ 0xda3e39cb94b95bdbull)) << 64) |
                     mix64(s.stream_id);
    inc_ = (seq << 1) | 1;
    state_ = 0;
    next();
    state_ += init_state;
    next();
  }

  std::uint64_t next() {
    const u128 old = state_;
    state_ = old * kMult + inc_;
    const std::uint64_t xored =
        static_cast<std::uint64_t>(old >> 64) ^ static_cast<std::uint64_t>(old);
    const unsigned rot = static_cast<unsigned>(old >> 122);
    return (xored >> rot) | (xored << ((64u - rot) & 63u));
  }

  // Uniform on [0,1) with 53 random bits.
  double uniform01() { return double(next() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1); rejects the single zero atom.
  double uniform_pos() {
    for (;;) {
      const double u = uniform01();
      if (u > 0.0) return u;
    }
  }

 private:
  using u128 = unsigned __int128;
  static constexpr u128 kMult =
      (u128(0x2360ed051fc65da4ull) << 64) | 0x4385df649fccf645ull;
  u128 state_;
  u128 inc_;
};

// Standard normal by the polar method. The antithetic mate is discarded;
// consumers that need pairs draw twice.
inline double normal(Pcg64& g) {
  for (;;) {
    const double u = 2.0 * g.uniform01() - 1.0;
    const double v = 2.0 * g.uniform01() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

// Gamma(shape, rate) by squeeze-rejection, valid for all shapes; shapes
// below one are boosted to shape+1 and corrected by a uniform power.
inline double gamma(Pcg64& g, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0))
    raise(errc::domain, "gamma: shape and rate must be positive");
  double boost = 1.0;
  double a = shape;
  if (a < 1.0) {
    boost = std::pow(g.uniform_pos(), 1.0 / a);
    a += 1.0;
  }
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal(g);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = g.uniform_pos();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return boost * d * v / rate;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v)))
      return boost * d * v / rate;
  }
}

// Beta(a, b) as a gamma ratio; a == 1 takes the exact inverse-CDF shortcut
// (one uniform instead of two gamma draws).
inline double beta(Pcg64& g, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    raise(errc::domain, "beta: both shape parameters must be positive");
  if (a == 1.0) return -std::expm1(std::log1p(-g.uniform01()) / b);
  const double x = gamma(g, a, 1.0);
  const double y = gamma(g, b, 1.0);
  return x / (x + y);
}

}  // namespace epkn::rng
