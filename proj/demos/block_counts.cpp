// Walkthrough: the block count of a random partition when the strength
// parameter grows linearly with the sample size.  Computes the exact law,
// compares it with the linear-rate predictions and with Monte Carlo draws,
// and prints the tilt-domain constants behind the normal approximation.

#include <cmath>
#include <cstdint>
#include <cstdio>

#include "epkn/cpr.hpp"
#include "epkn/dist.hpp"
#include "epkn/model.hpp"
#include "epkn/rng.hpp"
#include "epkn/samplers.hpp"

int main() {
  using namespace epkn;
  const model::ModelParams params{0.5, 1.0, 1000};
  const double nd = static_cast<double>(params.n);

  const auto law = model::pmf_kn(params);
  const auto mo = model::moments_exact(params);
  const double m = model::mean_rate(params.alpha, params.lambda);
  const double s2 = model::var_rate(params.alpha, params.lambda);

  std::printf("block count at alpha=%.2f lambda=%.2f n=%lld\n", params.alpha,
              params.lambda, static_cast<long long>(params.n));
  std::printf("  exact mean     %10.4f   linear rate n*m    %10.4f\n",
              mo.mean, nd * m);
  std::printf("  exact variance %10.4f   linear rate n*s2   %10.4f\n",
              mo.variance, nd * s2);

  // Modal region of the exact law.
  std::size_t mode_i = 0;
  for (std::size_t i = 0; i < law.p.size(); ++i)
    if (law.p[i] > law.p[mode_i]) mode_i = i;
  std::printf("  mode at k=%lld with mass %.4f\n",
              static_cast<long long>(law.atom(mode_i)), law.p[mode_i]);

  // Monte Carlo check through the sequential-seating sampler.
  const std::int64_t draws = 20'000;
  double sum = 0.0, sumsq = 0.0;
  for (std::int64_t i = 0; i < draws; ++i) {
    const auto s = samplers::sample_crp(
        params, rng::RngStream{7, static_cast<std::uint64_t>(i)});
    const double k = static_cast<double>(s.k);
    sum += k;
    sumsq += k * k;
  }
  const double mc_mean = sum / static_cast<double>(draws);
  const double mc_var =
      sumsq / static_cast<double>(draws) - mc_mean * mc_mean;
  std::printf("  %lld seating draws: mean %.4f, variance %.4f\n",
              static_cast<long long>(draws), mc_mean, mc_var);

  // Constants of the compound representation at the limiting tilt.
  const auto c = cpr::cpr_constants(params.alpha, params.lambda);
  std::printf("tilt domain: z0=%.6f Sigma2=%.6f tau(z0)=%.6f\n", c.z0,
              c.Sigma2, c.tau0);
  std::printf("  rate check: mu(z0)=%.6f vs m=%.6f\n", c.mu0, m);
  std::printf("  spread check: sigma2(z0)+Sigma2*mu'(z0)^2=%.6f vs s2=%.6f\n",
              c.sigma2_0 + c.Sigma2 * c.mu_prime0 * c.mu_prime0, s2);
  return 0;
}
