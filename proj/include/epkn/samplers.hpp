#pragma once

// Sampling routes for the block count: sequential seating (CRP), the
// Bernoulli-convolution shortcut at alpha = 0, stick-breaking with
// residual-mass truncation, inverse-CDF on an exact pmf, and the
// two-gamma surrogate for the tilt variable. Every route has an engine
// overload (for composition) and a handle overload; a draw made through a
// handle is a pure function of (seed, stream_id).

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "epkn/cpr.hpp"
#include "epkn/dist.hpp"
#include "epkn/errors.hpp"
#include "epkn/model.hpp"
#include "epkn/rng.hpp"

namespace epkn::samplers {

struct PartitionSample {
  std::int64_t k = 0;
  std::vector<std::int64_t> block_sizes;  // creation order, sums to n
};

namespace detail {

// Block seating switches from a linear weight scan to a Fenwick index at
// this size; both routes consume one uniform per item and agree draw for
// draw.
constexpr std::int64_t kFenwickThreshold = 10'000;

class Fenwick {
 public:
  explicit Fenwick(std::size_t capacity) : tree_(capacity + 1, 0.0) {
    while ((top_ << 1) <= capacity) top_ <<= 1;
  }

  void add(std::size_t i, double w) {
    for (std::size_t j = i + 1; j < tree_.size(); j += j & (~j + 1))
      tree_[j] += w;
  }

  // Zero-based index of the first leaf whose prefix sum exceeds target.
  std::size_t lower_index(double target) const {
    std::size_t pos = 0;
    for (std::size_t bit = top_; bit; bit >>= 1) {
      const std::size_t next = pos + bit;
      if (next < tree_.size() && tree_[next] <= target) {
        target -= tree_[next];
        pos = next;
      }
    }
    return pos;
  }

 private:
  std::vector<double> tree_;
  std::size_t top_ = 1;
};

inline PartitionSample sample_crp_impl(const model::ModelParams& params,
                                       rng::Pcg64& g, bool use_fenwick) {
  params.validate();
  const double theta = params.theta();
  const double alpha = params.alpha;
  std::vector<std::int64_t> sizes;
  sizes.push_back(1);
  Fenwick index(use_fenwick ? std::size_t(params.n) : 0);
  if (use_fenwick) index.add(0, 1.0 - alpha);
  for (std::int64_t i = 1; i < params.n; ++i) {
    const double k = double(sizes.size());
    const double t = g.uniform01() * (theta + double(i));
    if (t < theta + k * alpha) {
      if (use_fenwick) index.add(sizes.size(), 1.0 - alpha);
      sizes.push_back(1);
      continue;
    }
    const double target = t - (theta + k * alpha);
    std::size_t b;
    if (use_fenwick) {
      b = index.lower_index(target);
    } else {
      double cum = 0.0;
      b = sizes.size() - 1;
      for (std::size_t j = 0; j < sizes.size(); ++j) {
        cum += double(sizes[j]) - alpha;
        if (target < cum) {
          b = j;
          break;
        }
      }
    }
    if (b >= sizes.size()) b = sizes.size() - 1;  // roundoff guard
    ++sizes[b];
    if (use_fenwick) index.add(b, 1.0);
  }
  PartitionSample out;
  out.k = std::int64_t(sizes.size());
  out.block_sizes = std::move(sizes);
  return out;
}

}  // namespace detail

// Sequential seating: item i+1 opens a new block with probability
// (theta + k alpha)/(theta + i) and joins block b with probability
// (n_b - alpha)/(theta + i).
inline PartitionSample sample_crp(const model::ModelParams& params,
                                  rng::Pcg64& g) {
  return detail::sample_crp_impl(params, g,
                                 params.n >= detail::kFenwickThreshold);
}

inline PartitionSample sample_crp(const model::ModelParams& params,
                                  rng::RngStream s) {
  rng::Pcg64 g(s);
  return sample_crp(params, g);
}

// Sum of independent Bernoulli(theta/(theta+i-1)), i = 1..n; the first
// indicator is deterministically one.
inline std::int64_t sample_bernoulli_sum(const model::ModelParams& params,
                                         rng::Pcg64& g) {
  params.validate();
  if (params.alpha != 0.0)
    raise(errc::domain, "sample_bernoulli_sum requires alpha == 0");
  const double theta = params.theta();
  std::int64_t k = 1;
  for (std::int64_t i = 2; i <= params.n; ++i)
    k += (g.uniform01() * (theta + double(i - 1)) < theta);
  return k;
}

inline std::int64_t sample_bernoulli_sum(const model::ModelParams& params,
                                         rng::RngStream s) {
  rng::Pcg64 g(s);
  return sample_bernoulli_sum(params, g);
}

// Stick-breaking: weights W_j from V_j ~ Beta(1-alpha, theta + alpha j),
// labels by inverse CDF on the stick masses. The n label uniforms are drawn
// up front, so stick generation can stop as soon as every label is resolved;
// the law is unchanged because later sticks cannot capture a covered label.
// If the residual mass drops below trunc_tol/n first, the unresolved labels
// are lumped into one tail block (bias at most n * residual in expectation).
inline std::int64_t sample_stick_breaking(const model::ModelParams& params,
                                          rng::Pcg64& g, double trunc_tol) {
  params.validate();
  if (!(trunc_tol > 0.0) || trunc_tol > 1e-3)
    raise(errc::domain, "trunc_tol must lie in (0, 1e-3]");
  const double theta = params.theta();
  const double alpha = params.alpha;
  std::vector<double> u(std::size_t(params.n));
  for (auto& x : u) x = g.uniform01();
  std::sort(u.begin(), u.end());

  const double log_cutoff = std::log(trunc_tol) - std::log(double(params.n));
  constexpr std::int64_t kMaxSticks = 10'000'000;
  double log_residual = 0.0;
  std::int64_t sticks = 0;
  std::int64_t distinct = 0;
  std::size_t next_item = 0;
  while (next_item < u.size()) {
    if (log_residual < log_cutoff) break;
    if (sticks == kMaxSticks)
      raise(errc::truncation_overflow,
            "sample_stick_breaking: residual mass still above trunc_tol/n "
            "after 1e7 sticks");
    ++sticks;
    const double v = rng::beta(g, 1.0 - alpha, theta + alpha * double(sticks));
    log_residual += std::log1p(-v);
    const double covered = -std::expm1(log_residual);
    bool hit = false;
    while (next_item < u.size() && u[next_item] < covered) {
      ++next_item;
      hit = true;
    }
    distinct += hit;
  }
  if (next_item < u.size()) ++distinct;  // lumped tail
  return distinct;
}

inline std::int64_t sample_stick_breaking(const model::ModelParams& params,
                                          rng::RngStream s, double trunc_tol) {
  rng::Pcg64 g(s);
  return sample_stick_breaking(params, g, trunc_tol);
}

// Inverse-CDF sampler over a DiscreteDist: O(size) setup, O(log size) per
// draw.
class DiscreteSampler {
 public:
  explicit DiscreteSampler(const dist::DiscreteDist& d)
      : k0_(d.k0), cdf_(d.cdf()) {}

  std::int64_t operator()(rng::Pcg64& g) const {
    const double u = g.uniform01();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return k0_ + std::int64_t(it - cdf_.begin());
  }

 private:
  std::int64_t k0_;
  std::vector<double> cdf_;
};

inline std::int64_t sample_discrete(const dist::DiscreteDist& d,
                                    rng::Pcg64& g) {
  return DiscreteSampler(d)(g);
}

inline std::int64_t sample_discrete(const dist::DiscreteDist& d,
                                    rng::RngStream s) {
  rng::Pcg64 g(s);
  return sample_discrete(d, g);
}

// Two-gamma surrogate for the tilt variable: G1^{1-alpha} * G2^{alpha}.
inline double sample_zn_surrogate(double alpha, double lambda, std::int64_t n,
                                  rng::Pcg64& g) {
  const auto sp = cpr::zn_surrogate_params(alpha, lambda, n);
  const double g1 = rng::gamma(g, sp.shape1, sp.rate1);
  const double g2 = rng::gamma(g, sp.shape2, sp.rate2);
  return std::exp(sp.exp1 * std::log(g1) + sp.exp2 * std::log(g2));
}

inline double sample_zn_surrogate(double alpha, double lambda, std::int64_t n,
                                  rng::RngStream s) {
  rng::Pcg64 g(s);
  return sample_zn_surrogate(alpha, lambda, n, g);
}

}  // namespace epkn::samplers
