#pragma once

// Block-count law K_n of the two-parameter (alpha, theta) exchangeable
// partition model in the linear regime theta = lambda * n: exact pmf,
// exact moments, and the
// linear-growth constants m and s^2 with E[K_n] = n m + O(1) and
// Var K_n = n s^2 + O(1).

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "dist.hpp"
#include "errors.hpp"
#include "gfc.hpp"
#include "numerics.hpp"

namespace epkn::model {

struct ModelParams {
  double alpha = 0.0;
  double lambda = 1.0;
  std::int64_t n = 1;

  double theta() const { return lambda * static_cast<double>(n); }

  void validate() const {
    if (!(alpha >= 0.0) || alpha >= 1.0)
      raise(errc::domain, "model: alpha must lie in [0,1)");
    if (!(lambda > 0.0))
      raise(errc::domain, "model: lambda must be positive");
    if (n < 1) raise(errc::domain, "model: n must be >= 1");
  }
};

// Linear growth rate of the mean: m = (lambda/alpha)((1+1/lambda)^alpha - 1),
// continuously extended to lambda log(1+1/lambda) at alpha = 0.
inline double mean_rate(double alpha, double lambda) {
  if (!(lambda > 0.0)) raise(errc::domain, "mean_rate: lambda must be > 0");
  if (!(alpha >= 0.0) || alpha >= 1.0)
    raise(errc::domain, "mean_rate: alpha must lie in [0,1)");
  const double big_l = std::log1p(1.0 / lambda);
  if (alpha == 0.0) return lambda * big_l;
  return lambda / alpha * std::expm1(alpha * big_l);
}

// Linear growth rate of the variance:
//   s^2 = (lambda/alpha)[(1+1/lambda)^{2 alpha}(1 - alpha/(1+lambda))
//                        - (1+1/lambda)^alpha],
// extended to lambda log(1+1/lambda) - lambda/(1+lambda) at alpha = 0.
// Grouped as e^{aL} expm1(aL) lambda/alpha - lambda e^{2aL}/(1+lambda) so no
// term cancels as alpha -> 0.
inline double var_rate(double alpha, double lambda) {
  if (!(lambda > 0.0)) raise(errc::domain, "var_rate: lambda must be > 0");
  if (!(alpha >= 0.0) || alpha >= 1.0)
    raise(errc::domain, "var_rate: alpha must lie in [0,1)");
  const double big_l = std::log1p(1.0 / lambda);
  if (alpha == 0.0) return lambda * big_l - lambda / (1.0 + lambda);
  const double e1 = std::exp(alpha * big_l);
  return lambda * e1 * std::expm1(alpha * big_l) / alpha -
         lambda * e1 * e1 / (1.0 + lambda);
}

// Exact pmf over k = 1..n from a prebuilt scaled coefficient row
// (row[k-1] = ln(C(n,k;alpha)/alpha^k), or ln|s(n,k)| at alpha = 0):
//   ln P(K_n = k) = row[k] + sum_{i<k} ln(theta + i alpha) - ln [theta]_(n).
// The same tilt expression covers both alpha regimes.
inline dist::DiscreteDist pmf_kn_from_row(const ModelParams& params,
                                          std::span<const double> row) {
  params.validate();
  const std::int64_t n = params.n;
  if (row.size() != static_cast<std::size_t>(n))
    raise(errc::domain, "pmf_kn_from_row: row length must equal n");
  const double theta = params.theta();
  const double log_norm = num::log_rising(theta, n);
  std::vector<double> logw(static_cast<std::size_t>(n));
  long double tilt = 0.0L;  // ln [theta]_(k, alpha), accumulated over k
  for (std::int64_t k = 1; k <= n; ++k) {
    tilt += std::log(theta + static_cast<long double>(k - 1) * params.alpha);
    logw[k - 1] = row[k - 1] + static_cast<double>(tilt) - log_norm;
  }
  return dist::from_log_weights(1, logw);
}

inline dist::DiscreteDist pmf_kn(const ModelParams& params) {
  params.validate();
  return pmf_kn_from_row(params, gfc::scaled_row(params.alpha, params.n));
}

struct ExactMoments {
  double mean = 0.0;
  double variance = 0.0;
};

namespace detail {

// ln of [x2]-over-[x1] Gamma increment ratio:
// delta(a) = ln( Gamma(x2+a) Gamma(x1) / (Gamma(x2) Gamma(x1+a)) ).
inline long double lgamma_ratio_diff(long double x1, long double x2,
                                     long double a) {
  return num::lgamma_ratio_ld(x2, a) - num::lgamma_ratio_ld(x1, a);
}

}  // namespace detail

// Exact mean and variance.
//
// alpha in (0,1), q = theta/alpha, r_i = [theta+n]-ratio of Gamma increments:
//   E[K_n]  = q (r_1 - 1)
//   Var K_n = q^2 r_1^2 expm1(eps) + q (d_2 - d_1),
// where d_i = expm1(delta_i) and eps = delta_2 - 2 delta_1 collapses to a
// difference of second Gamma differences, evaluated without cancellation by
// the trigamma quadrature.  This is the algebraic rearrangement of
// q(q+1)(1 - 2 r_1 + r_2) + E - E^2 that survives n ~ 1e6 in doubles.
//
// alpha = 0:
//   E[K_n]  = theta (psi(theta+n) - psi(theta))
//   Var K_n = theta^2 (psi'(theta+n) - psi'(theta)) + E[K_n],
// both differences benign.
inline ExactMoments moments_exact(const ModelParams& params) {
  params.validate();
  const long double theta = params.theta();
  const long double n = static_cast<long double>(params.n);
  const long double x1 = theta, x2 = theta + n;
  ExactMoments out;
  if (params.alpha == 0.0) {
    const long double dpsi = num::digamma_ld(x2) - num::digamma_ld(x1);
    const long double dtri = num::trigamma_ld(x2) - num::trigamma_ld(x1);
    out.mean = static_cast<double>(theta * dpsi);
    out.variance = static_cast<double>(theta * theta * dtri + theta * dpsi);
    return out;
  }
  const long double a = params.alpha;
  const long double q = theta / a;
  const long double d1 = std::expm1(detail::lgamma_ratio_diff(x1, x2, a));
  const long double d2 =
      std::expm1(detail::lgamma_ratio_diff(x1, x2, 2.0L * a));
  const long double r1 = 1.0L + d1;
  const long double eps =
      num::lgamma_second_diff_ld(x2, a) - num::lgamma_second_diff_ld(x1, a);
  out.mean = static_cast<double>(q * d1);
  out.variance =
      static_cast<double>(q * q * r1 * r1 * std::expm1(eps) + q * (d2 - d1));
  return out;
}

namespace detail {

// Stirling numbers of the second kind up to row p.
inline std::vector<std::vector<long double>> stirling2(int pmax) {
  std::vector<std::vector<long double>> s(pmax + 1,
                                          std::vector<long double>(pmax + 1));
  s[0][0] = 1.0L;
  for (int p = 1; p <= pmax; ++p)
    for (int i = 1; i <= p; ++i)
      s[p][i] = s[p - 1][i - 1] + i * s[p - 1][i];
  return s;
}

// Moments of Y = q + K_n in the rising-factorial basis:
//   E[[Y]_(i)] = [q]_(i) * r_i,  r_i = exp(delta(i alpha)),
// an exact identity of the partition law.  Powers follow via Stirling
// inversion Y^p = sum_i (-1)^{p-i} S(p,i) [Y]_(i).
struct RisingMoments {
  long double q = 0.0L;
  std::vector<long double> m;  // m[i] = E[[Y]_(i)], i = 0..jmax

  // E[poly(Y)] for poly given by coefficients c[p] of Y^p; also reports the
  // largest intermediate magnitude, the input for cancellation diagnostics.
  std::pair<long double, long double> expect_poly(
      std::span<const long double> c) const {
    const int pmax = static_cast<int>(c.size()) - 1;
    static const auto s2 = stirling2(12);
    long double acc = 0.0L, peak = 0.0L;
    for (int p = 0; p <= pmax; ++p) {
      if (c[p] == 0.0L) continue;
      long double ypow = (p == 0) ? 1.0L : 0.0L;
      for (int i = 1; i <= p; ++i) {
        const long double term =
            ((p - i) % 2 == 0 ? 1.0L : -1.0L) * s2[p][i] * m[i];
        ypow += term;
        if (std::fabs(term) > peak) peak = std::fabs(term);
      }
      const long double contrib = c[p] * ypow;
      acc += contrib;
      if (std::fabs(contrib) > peak) peak = std::fabs(contrib);
    }
    return {acc, peak};
  }
};

inline RisingMoments rising_moments(const ModelParams& params, int jmax) {
  const long double theta = params.theta();
  const long double a = params.alpha;
  const long double x1 = theta, x2 = theta + params.n;
  RisingMoments rm;
  rm.q = theta / a;
  rm.m.assign(jmax + 1, 1.0L);
  long double qrise = 1.0L;
  for (int i = 1; i <= jmax; ++i) {
    qrise *= rm.q + (i - 1);
    rm.m[i] = qrise * std::exp(lgamma_ratio_diff(x1, x2, i * a));
  }
  return rm;
}

// Coefficients of prod_t (Y - roots[t]) in the monomial basis of Y.
inline std::vector<long double> poly_from_roots(
    std::span<const long double> roots) {
  std::vector<long double> c = {1.0L};
  for (long double r : roots) {
    c.push_back(0.0L);
    for (std::size_t i = c.size() - 1; i >= 1; --i)
      c[i] = c[i - 1] - r * c[i];
    c[0] = -r * c[0];
  }
  return c;
}

}  // namespace detail

// Falling factorial moment E[K_n (K_n - 1) ... (K_n - j + 1)], 1 <= j <= 8.
inline double falling_factorial_moment(const ModelParams& params, int j) {
  params.validate();
  if (j < 1 || j > 8)
    raise(errc::domain, "falling_factorial_moment: j must be in 1..8");
  if (params.alpha == 0.0) {
    // pgf route: G(s) = prod_i (theta s + i)/(theta + i), i = 0..n-1, and
    // E[(K)_j] = G^(j)(1) = complete Bell polynomial in the log-derivatives
    //   h_m = (-1)^{m-1} (m-1)! sum_i (theta/(theta+i))^m.
    const long double theta = params.theta();
    std::vector<long double> h(j + 1, 0.0L);
    for (std::int64_t i = 0; i < params.n; ++i) {
      const long double ratio = theta / (theta + i);
      long double pw = 1.0L;
      for (int m = 1; m <= j; ++m) {
        pw *= ratio;
        h[m] += pw;
      }
    }
    long double fact = 1.0L;
    for (int m = 1; m <= j; ++m) {
      h[m] *= (m % 2 == 0 ? -fact : fact);
      fact *= m;
    }
    // B_{m+1} = sum_i binom(m,i) B_{m-i} h_{i+1}
    std::vector<long double> bell(j + 1, 0.0L);
    bell[0] = 1.0L;
    for (int m = 0; m < j; ++m) {
      long double binom = 1.0L;
      long double acc = 0.0L;
      for (int i = 0; i <= m; ++i) {
        acc += binom * bell[m - i] * h[i + 1];
        binom = binom * (m - i) / (i + 1);
      }
      bell[m + 1] = acc;
    }
    return static_cast<double>(bell[j]);
  }
  const auto rm = detail::rising_moments(params, j);
  std::vector<long double> roots(j);
  for (int t = 0; t < j; ++t) roots[t] = rm.q + t;  // K - t = Y - (q + t)
  const auto poly = detail::poly_from_roots(roots);
  return static_cast<double>(rm.expect_poly(poly).first);
}

// Fourth central moment E[(K_n - E K_n)^4], exact.
//
// alpha = 0 uses the independent-Bernoulli representation of K_n
// (success probabilities theta/(theta+i), i = 0..n-1) through cumulants:
// kappa_4 + 3 kappa_2^2, all positive sums.
//
// alpha in (0,1) expands (Y - c)^4, Y = q + K_n, c = q + E K_n, over the
// rising-factorial moments.  The expansion cancels by construction (c^4
// against E Y^4), so the estimated relative error is tracked and a precision
// error is raised when it crosses 1e-6.
inline double central4_exact(const ModelParams& params) {
  params.validate();
  if (params.alpha == 0.0) {
    const long double theta = params.theta();
    long double k2 = 0.0L, k4 = 0.0L;
    for (std::int64_t i = 0; i < params.n; ++i) {
      const long double p = theta / (theta + i);
      const long double v = p * (1.0L - p);
      k2 += v;
      k4 += v * (1.0L - 6.0L * v);
    }
    return static_cast<double>(k4 + 3.0L * k2 * k2);
  }
  const auto rm = detail::rising_moments(params, 4);
  const long double mean = moments_exact(params).mean;
  const long double c = rm.q + mean;
  const long double roots[4] = {c, c, c, c};
  const auto poly = detail::poly_from_roots(roots);
  const auto [value, peak] = rm.expect_poly(poly);
  const double est_rel_err =
      static_cast<double>(1e-17L * peak / std::fabs(value));
  if (!(std::fabs(value) > 0.0L) || est_rel_err > 1e-6)
    raise(errc::precision,
          "central4_exact: cancellation beyond contract at n=" +
              std::to_string(params.n));
  return static_cast<double>(value);
}

}  // namespace epkn::model
