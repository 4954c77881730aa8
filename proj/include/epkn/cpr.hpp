#pragma once

// Compound-Poisson side of the block-count law: the tilted distribution
// R(alpha, n, z) with weights C(n,k;alpha) z^k, its mean/variance functions
// mu(z), sigma^2(z) parametrized by the fixed point tau(z), the limit
// constants of the random tilt Z_n, and the gamma-product surrogate for Z_n.
// K_n is R(alpha, n, Z_n) in distribution, and the delta-method identities
//   mu(z0) = m,   sigma^2(z0) + Sigma^2 mu'(z0)^2 = s^2
// tie this representation to the direct constants; cpr_constants enforces
// them at construction time.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dist.hpp"
#include "errors.hpp"
#include "gfc.hpp"
#include "model.hpp"
#include "numerics.hpp"

namespace epkn::cpr {

struct FixedPointResult {
  double tau = 0.0;
  int iterations = 0;
  double residual = 0.0;  // |ln tau / alpha - ln(tau/(alpha z) + 1)| at exit
};

// Unique root in (1, inf) of tau^{1/alpha} = tau/(alpha z) + 1.
//
// In u = ln tau the defect g(u) = u/alpha - ln(e^u/(alpha z) + 1) is strictly
// increasing (g' >= 1/alpha - 1 > 0), g(0) < 0, so a bisection-guarded Newton
// iteration on a sign-changing bracket cannot miss.  The root decreases in z:
// tau ~ (alpha z)^{-alpha/(1-alpha)} as z -> 0+ and tau -> 1+ as z -> inf,
// which sets the bracket's upper end.
inline FixedPointResult tau_solve(double alpha, double z) {
  if (!(alpha > 0.0) || alpha >= 1.0)
    raise(errc::domain, "tau_solve: alpha must lie in (0,1)");
  if (!(z > 0.0)) raise(errc::domain, "tau_solve: z must be positive");

  const double az = alpha * z;
  auto defect = [&](double u) {
    return u / alpha - num::logsumexp(u - std::log(az), 0.0);
  };

  double lo = 0.0;  // g(0) = -log1p(1/(alpha z)) < 0
  // ln of 2 max(2, (alpha z)^{-alpha/(1-alpha)}), formed in log space so an
  // extreme z cannot overflow the bracket.
  double hi = std::log(2.0) +
              std::max(std::log(2.0), alpha / (1.0 - alpha) *
                                          std::max(0.0, -std::log(az)));
  int iters = 0;
  while (defect(hi) <= 0.0) {
    hi *= 2.0;
    if (++iters > 200)
      raise(errc::precision, "tau_solve: bracket expansion failed");
  }

  double u = 0.5 * (lo + hi);
  double g = defect(u);
  for (; iters < 200; ++iters) {
    if (g > 0.0)
      hi = u;
    else
      lo = u;
    const double eu_over = 1.0 / (1.0 + az * std::exp(-u));  // e^u/(e^u+az)
    const double gp = 1.0 / alpha - eu_over;
    double next = u - g / gp;
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    const double step = std::fabs(next - u);
    u = next;
    g = defect(u);
    if (std::fabs(g) < 1e-15 * (1.0 + std::fabs(u) / alpha) &&
        step < 1e-12 * std::max(1.0, std::fabs(u)))
      break;
  }
  return {std::exp(u), iters, std::fabs(g)};
}

namespace detail {

// D(z) = z tau^{(1-alpha)/alpha} - 1, in the power-free rational form the
// fixed point equation implies.
inline double big_d(double alpha, double z, double tau) {
  return (alpha * z + (1.0 - alpha) * tau) / (alpha * tau);
}

}  // namespace detail

inline double mu_of_z(double alpha, double z) {
  const double tau = tau_solve(alpha, z).tau;
  return z * (1.0 - 1.0 / tau);
}

inline double sigma2_of_z(double alpha, double z) {
  const double tau = tau_solve(alpha, z).tau;
  return z * (1.0 - 1.0 / tau -
              alpha / (alpha * z + (1.0 - alpha) * tau));
}

// d mu / d z = 1 - 1/tau - 1/(tau D(z)).
inline double mu_prime(double alpha, double z) {
  const double tau = tau_solve(alpha, z).tau;
  return 1.0 - 1.0 / tau - 1.0 / (tau * detail::big_d(alpha, z, tau));
}

// Centering tilt and the tilt's own CLT variance:
//   z0 = (lambda/alpha) ((lambda+1)/lambda)^alpha
//   Sigma^2 = (lambda/alpha) ((lambda+1)/lambda)^{2 alpha} (1 - alpha/(lambda+1))
inline double z0_const(double alpha, double lambda) {
  if (!(alpha > 0.0) || alpha >= 1.0)
    raise(errc::domain, "z0_const: alpha must lie in (0,1)");
  if (!(lambda > 0.0)) raise(errc::domain, "z0_const: lambda must be > 0");
  return lambda / alpha * std::exp(alpha * std::log1p(1.0 / lambda));
}

inline double sigma2_tilt_const(double alpha, double lambda) {
  if (!(alpha > 0.0) || alpha >= 1.0)
    raise(errc::domain, "sigma2_tilt_const: alpha must lie in (0,1)");
  if (!(lambda > 0.0))
    raise(errc::domain, "sigma2_tilt_const: lambda must be > 0");
  return lambda / alpha * std::exp(2.0 * alpha * std::log1p(1.0 / lambda)) *
         (1.0 - alpha / (lambda + 1.0));
}

struct CprConstants {
  double z0 = 0.0;
  double Sigma2 = 0.0;
  double tau0 = 0.0;
  double mu0 = 0.0;
  double sigma2_0 = 0.0;
  double mu_prime0 = 0.0;
  double residual_mean = 0.0;  // |mu(z0) - m|
  double residual_var = 0.0;   // |sigma^2(z0) + Sigma^2 mu'(z0)^2 - s^2|
};

inline CprConstants cpr_constants(double alpha, double lambda) {
  CprConstants c;
  c.z0 = z0_const(alpha, lambda);
  c.Sigma2 = sigma2_tilt_const(alpha, lambda);
  c.tau0 = tau_solve(alpha, c.z0).tau;
  c.mu0 = c.z0 * (1.0 - 1.0 / c.tau0);
  c.sigma2_0 = c.z0 * (1.0 - 1.0 / c.tau0 -
                       alpha / (alpha * c.z0 + (1.0 - alpha) * c.tau0));
  c.mu_prime0 = 1.0 - 1.0 / c.tau0 -
                1.0 / (c.tau0 * detail::big_d(alpha, c.z0, c.tau0));
  const double m = model::mean_rate(alpha, lambda);
  const double s2 = model::var_rate(alpha, lambda);
  c.residual_mean = std::fabs(c.mu0 - m);
  c.residual_var =
      std::fabs(c.sigma2_0 + c.Sigma2 * c.mu_prime0 * c.mu_prime0 - s2);
  if (c.residual_mean > 1e-9 || c.residual_var > 1e-9)
    raise(errc::coherence_violation,
          "cpr_constants: delta-method identities broken at alpha=" +
              std::to_string(alpha) + " lambda=" + std::to_string(lambda));
  return c;
}

// Law of R(alpha, n, z): P(R = k) proportional to C(n,k;alpha) z^k, k = 1..n,
// assembled from a scaled coefficient row (weights D(n,k) (alpha z)^k).
inline dist::DiscreteDist rn_pmf_from_row(double alpha, std::int64_t n,
                                          double z,
                                          std::span<const double> row) {
  if (!(alpha > 0.0) || alpha >= 1.0)
    raise(errc::domain, "rn_pmf: alpha must lie in (0,1)");
  if (!(z > 0.0)) raise(errc::domain, "rn_pmf: z must be positive");
  if (n < 1) raise(errc::domain, "rn_pmf: n must be >= 1");
  if (row.size() != static_cast<std::size_t>(n))
    raise(errc::domain, "rn_pmf: row length must equal n");
  const double log_az = std::log(alpha * z);
  std::vector<double> logw(static_cast<std::size_t>(n));
  for (std::int64_t k = 1; k <= n; ++k)
    logw[k - 1] = row[k - 1] + static_cast<double>(k) * log_az;
  return dist::from_log_weights(1, logw);
}

inline dist::DiscreteDist rn_pmf(double alpha, std::int64_t n, double z) {
  if (!(alpha > 0.0) || alpha >= 1.0)
    raise(errc::domain, "rn_pmf: alpha must lie in (0,1)");
  return rn_pmf_from_row(alpha, n, z, gfc::scaled_row(alpha, n));
}

struct ZnMoments {
  double mean = 0.0;
  double variance = 0.0;
};

// Exact Gamma-ratio moments of the tilt Z_n (q = lambda n / alpha):
//   E[Z_n^j] = [q]_(j) Gamma(theta) Gamma(theta+n+j alpha)
//              / (Gamma(theta+j alpha) Gamma(theta+n)),
// with the variance taken as E^2 expm1(log1p(1/q) + eps) so nothing cancels;
// eps is the same second-difference term the exact K_n variance uses.
inline ZnMoments zn_moments(double alpha, double lambda, std::int64_t n) {
  if (!(alpha > 0.0) || alpha >= 1.0)
    raise(errc::domain, "zn_moments: alpha must lie in (0,1)");
  if (!(lambda > 0.0)) raise(errc::domain, "zn_moments: lambda must be > 0");
  if (n < 1) raise(errc::domain, "zn_moments: n must be >= 1");
  const long double a = alpha;
  const long double theta = static_cast<long double>(lambda) * n;
  const long double x1 = theta, x2 = theta + n;
  const long double q = theta / a;
  const long double delta1 =
      num::lgamma_ratio_ld(x2, a) - num::lgamma_ratio_ld(x1, a);
  const long double mean = q * std::exp(delta1);
  const long double eps =
      num::lgamma_second_diff_ld(x2, a) - num::lgamma_second_diff_ld(x1, a);
  const long double variance =
      mean * mean * std::expm1(std::log1p(1.0L / q) + eps);
  return {static_cast<double>(mean), static_cast<double>(variance)};
}

// Gamma-product surrogate for Z_n: with rho = lambda (1-alpha)/alpha and
// B = (1-alpha) alpha^{alpha/(1-alpha)},
//   Z_n ~ G1^{1-alpha} G2^alpha,  G1 ~ Gamma(rho n + 1/2, rate B),
//                                 G2 ~ Gamma((lambda+1) n, rate 1),
// within total variation O(1/n) of the true tilt.
struct SurrogateParams {
  double shape1 = 0.0;
  double rate1 = 0.0;
  double shape2 = 0.0;
  double rate2 = 1.0;
  double exp1 = 0.0;  // exponent on G1
  double exp2 = 0.0;  // exponent on G2
};

inline SurrogateParams zn_surrogate_params(double alpha, double lambda,
                                           std::int64_t n) {
  if (!(alpha > 0.0) || alpha >= 1.0)
    raise(errc::domain, "zn_surrogate_params: alpha must lie in (0,1)");
  if (!(lambda > 0.0))
    raise(errc::domain, "zn_surrogate_params: lambda must be > 0");
  if (n < 1) raise(errc::domain, "zn_surrogate_params: n must be >= 1");
  const double rho = lambda * (1.0 - alpha) / alpha;
  SurrogateParams p;
  p.shape1 = rho * static_cast<double>(n) + 0.5;
  p.rate1 = (1.0 - alpha) * std::pow(alpha, alpha / (1.0 - alpha));
  p.shape2 = (lambda + 1.0) * static_cast<double>(n);
  p.rate2 = 1.0;
  p.exp1 = 1.0 - alpha;
  p.exp2 = alpha;
  return p;
}

}  // namespace epkn::cpr
