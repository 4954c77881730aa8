#pragma once

// Scalar special functions and summation helpers used by every other header.
// Everything is evaluated in long double internally and exposed as double;
// the extra mantissa bits are what keep the large-n moment formulas stable.
// Asymptotic series coefficients follow Abramowitz & Stegun 6.1.41, 6.3.18,
// 6.4.12 (Bernoulli-number tails for ln Gamma, psi, psi').

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace epkn::num {

using ld = long double;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr ld kHalfLog2Pi = 0.91893853320467274178032973640562L;

namespace detail {

// Stirling tail: ln Gamma(y) - [(y-1/2) ln y - y + ln(2 pi)/2] for y >= 16.
// Nine Bernoulli terms leave a truncation error below 1e-21 at y = 16.
inline ld lgamma_tail(ld y) {
  static constexpr ld c[9] = {
      1.0L / 12.0L,
      -1.0L / 360.0L,
      1.0L / 1260.0L,
      -1.0L / 1680.0L,
      1.0L / 1188.0L,
      -691.0L / 360360.0L,
      1.0L / 156.0L,
      -3617.0L / 122400.0L,
      43867.0L / 244188.0L,
  };
  const ld r = 1.0L / y;
  const ld t = r * r;
  ld s = c[8];
  for (int k = 7; k >= 0; --k) s = c[k] + t * s;
  return r * s;
}

inline constexpr ld kAsymptoticCut = 16.0L;

}  // namespace detail

// ln Gamma(x) for x > 0.  Recurrence shift into the asymptotic region keeps
// the series valid on the whole domain.
inline ld lgamma_ld(ld x) {
  if (std::isnan(x)) return x;
  if (x < 0.0L) raise(errc::domain, "lgamma_ld: x must be positive");
  if (x == 0.0L) return std::numeric_limits<ld>::infinity();
  ld shift = 0.0L;
  ld y = x;
  while (y < detail::kAsymptoticCut) {
    shift += std::log(y);
    y += 1.0L;
  }
  return (y - 0.5L) * std::log(y) - y + kHalfLog2Pi + detail::lgamma_tail(y) -
         shift;
}

inline double log_gamma(double x) { return static_cast<double>(lgamma_ld(x)); }

// psi(x) = d/dx ln Gamma(x), x > 0.
inline ld digamma_ld(ld x) {
  if (std::isnan(x)) return x;
  if (x <= 0.0L) raise(errc::domain, "digamma_ld: x must be positive");
  ld shift = 0.0L;
  ld y = x;
  while (y < detail::kAsymptoticCut) {
    shift += 1.0L / y;
    y += 1.0L;
  }
  const ld u = 1.0L / (y * y);
  // A&S 6.3.18 truncated after the y^-14 term.
  ld s = 691.0L / 32760.0L - u * (1.0L / 12.0L);
  s = 1.0L / 132.0L - u * s;
  s = 1.0L / 240.0L - u * s;
  s = 1.0L / 252.0L - u * s;
  s = 1.0L / 120.0L - u * s;
  s = 1.0L / 12.0L - u * s;
  return std::log(y) - 0.5L / y - u * s - shift;
}

inline double digamma(double x) { return static_cast<double>(digamma_ld(x)); }

// psi'(x), x > 0.
inline ld trigamma_ld(ld x) {
  if (std::isnan(x)) return x;
  if (x <= 0.0L) raise(errc::domain, "trigamma_ld: x must be positive");
  ld shift = 0.0L;
  ld y = x;
  while (y < detail::kAsymptoticCut) {
    shift += 1.0L / (y * y);
    y += 1.0L;
  }
  const ld u = 1.0L / (y * y);
  // A&S 6.4.12 truncated after the y^-15 term.
  ld s = 691.0L / 2730.0L - u * (7.0L / 6.0L);
  s = 5.0L / 66.0L - u * s;
  s = 1.0L / 30.0L - u * s;
  s = 1.0L / 42.0L - u * s;
  s = 1.0L / 30.0L - u * s;
  s = 1.0L / 6.0L - u * s;
  return 1.0L / y + 0.5L * u + (u / y) * s + shift;
}

inline double trigamma(double x) {
  return static_cast<double>(trigamma_ld(x));
}

// ln Gamma(x+a) - ln Gamma(x) without forming the two large logs when x is in
// the asymptotic region; the direct difference there would cancel most digits.
inline ld lgamma_ratio_ld(ld x, ld a) {
  if (x <= 0.0L || x + a <= 0.0L)
    raise(errc::domain, "lgamma_ratio_ld: arguments must stay positive");
  if (a == 0.0L) return 0.0L;
  if (x >= detail::kAsymptoticCut && x + a >= detail::kAsymptoticCut) {
    return (x - 0.5L) * std::log1p(a / x) + a * std::log(x + a) - a +
           detail::lgamma_tail(x + a) - detail::lgamma_tail(x);
  }
  return lgamma_ld(x + a) - lgamma_ld(x);
}

inline double lgamma_ratio(double x, double a) {
  return static_cast<double>(lgamma_ratio_ld(x, a));
}

// Gauss-Legendre nodes/weights on [-1,1], generated once by Newton iteration
// on the Legendre recurrence (exact to long double working precision).
inline const std::vector<std::pair<ld, ld>>& gauss_legendre32() {
  static const std::vector<std::pair<ld, ld>> table = [] {
    constexpr int n = 32;
    std::vector<std::pair<ld, ld>> out(n);
    for (int i = 0; i < n; ++i) {
      ld x = std::cos(3.14159265358979323846L * (i + 0.75L) / (n + 0.5L));
      ld dp = 0.0L;
      for (int it = 0; it < 64; ++it) {
        ld p0 = 1.0L, p1 = x;
        for (int k = 1; k < n; ++k) {
          ld p2 = ((2 * k + 1) * x * p1 - k * p0) / (k + 1);
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0L);
        ld dx = p1 / dp;
        x -= dx;
        if (std::fabs(dx) < 1e-19L) break;
      }
      out[i] = {x, 2.0L / ((1.0L - x * x) * dp * dp)};
    }
    return out;
  }();
  return table;
}

// Second forward difference ln Gamma(x+2a) - 2 ln Gamma(x+a) + ln Gamma(x).
// For large x the direct form cancels catastrophically (the result decays
// like a^2/x while the terms grow like x ln x), so it is evaluated as the
// equivalent double integral of psi' over [0,a]^2, whose integrand is
// positive and smooth.
inline ld lgamma_second_diff_ld(ld x, ld a) {
  if (a == 0.0L) return 0.0L;
  if (x < 64.0L) {
    return lgamma_ld(x + 2.0L * a) - 2.0L * lgamma_ld(x + a) + lgamma_ld(x);
  }
  const auto& gl = gauss_legendre32();
  const ld h = 0.5L * a;
  ld total = 0.0L;
  for (const auto& [xs, ws] : gl) {
    const ld s = h * (xs + 1.0L);
    ld inner = 0.0L;
    for (const auto& [xt, wt] : gl) {
      const ld t = h * (xt + 1.0L);
      inner += wt * trigamma_ld(x + s + t);
    }
    total += ws * inner;
  }
  return total * h * h;
}

inline double lgamma_second_diff(double x, double a) {
  return static_cast<double>(lgamma_second_diff_ld(x, a));
}

// Rising factorial [x]_(n) = x (x+1) ... (x+n-1) in log space.  Direct
// product below the crossover, Gamma-ratio form above it.
inline constexpr long long kRisingCrossover = 32;

inline ld log_rising_ld(ld x, long long n) {
  if (x <= 0.0L) raise(errc::domain, "log_rising_ld: x must be positive");
  if (n < 0) raise(errc::domain, "log_rising_ld: n must be nonnegative");
  if (n == 0) return 0.0L;
  if (n < kRisingCrossover) {
    ld s = 0.0L;
    for (long long i = 0; i < n; ++i) s += std::log(x + static_cast<ld>(i));
    return s;
  }
  return lgamma_ratio_ld(x, static_cast<ld>(n));
}

inline double log_rising(double x, long long n) {
  return static_cast<double>(log_rising_ld(x, n));
}

// Generalized rising factorial [x]_(n,a) = prod_{i=0}^{n-1} (x + i a).
inline ld log_rising_step_ld(ld x, long long n, ld a) {
  if (n < 0) raise(errc::domain, "log_rising_step_ld: n must be nonnegative");
  if (n == 0) return 0.0L;
  if (x <= 0.0L) raise(errc::domain, "log_rising_step_ld: x must be positive");
  if (a == 0.0L) return static_cast<ld>(n) * std::log(x);
  if (a == 1.0L) return log_rising_ld(x, n);
  if (n < kRisingCrossover) {
    ld s = 0.0L;
    for (long long i = 0; i < n; ++i)
      s += std::log(x + static_cast<ld>(i) * a);
    return s;
  }
  // [x]_(n,a) = a^n Gamma(x/a + n) / Gamma(x/a) for a > 0.
  return static_cast<ld>(n) * std::log(a) +
         lgamma_ratio_ld(x / a, static_cast<ld>(n));
}

inline double log_rising_step(double x, long long n, double a) {
  return static_cast<double>(log_rising_step_ld(x, n, a));
}

// log(exp(a) + exp(b)) with -inf handled as an identity element.
inline double logsumexp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = a > b ? a : b;
  const double d = (a > b ? b : a) - m;
  return m + std::log1p(std::exp(d));
}

inline double logsumexp(std::span<const double> xs) {
  if (xs.empty()) raise(errc::empty_input, "logsumexp: empty range");
  double m = kNegInf;
  for (double x : xs)
    if (x > m) m = x;
  if (m == kNegInf) return kNegInf;
  ld s = 0.0L;
  for (double x : xs) s += std::exp(static_cast<ld>(x - m));
  return m + static_cast<double>(std::log(s));
}

// Neumaier-compensated sum; used wherever a pmf or statistic is accumulated
// in a fixed order that must not drift with chunking.
inline double stable_sum(std::span<const double> xs) {
  double s = 0.0, c = 0.0;
  for (double x : xs) {
    const double t = s + x;
    if (std::fabs(s) >= std::fabs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  return s + c;
}

inline double std_normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

}  // namespace epkn::num
