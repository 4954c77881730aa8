#pragma once

// Dense distribution over a contiguous integer support; the common currency
// between the exact laws, the samplers and the verification drivers.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"

namespace epkn::dist {

struct DiscreteDist {
  std::int64_t k0 = 0;       // first atom; atom i sits at k0 + i
  std::vector<double> p;     // normalized probabilities
  std::vector<double> logp;
  // Total raw mass minus 1 before normalization.  Meaningful when the log
  // weights are supposed to sum to one already (exact pmf construction).
  double norm_defect = 0.0;

  std::size_t size() const { return p.size(); }
  std::int64_t atom(std::size_t i) const {
    return k0 + static_cast<std::int64_t>(i);
  }

  double mean() const {
    long double s = 0.0L;
    for (std::size_t i = 0; i < p.size(); ++i)
      s += static_cast<long double>(p[i]) * atom(i);
    return static_cast<double>(s);
  }

  double variance() const {
    const long double m = mean();
    long double s = 0.0L;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const long double d = atom(i) - m;
      s += static_cast<long double>(p[i]) * d * d;
    }
    return static_cast<double>(s);
  }

  double central_moment(int order) const {
    const long double m = mean();
    long double s = 0.0L;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const long double d = atom(i) - m;
      long double dk = 1.0L;
      for (int t = 0; t < order; ++t) dk *= d;
      s += static_cast<long double>(p[i]) * dk;
    }
    return static_cast<double>(s);
  }

  // Right-closed CDF values F(atom(i)), last entry forced to 1.
  std::vector<double> cdf() const {
    std::vector<double> out(p.size());
    long double acc = 0.0L;
    for (std::size_t i = 0; i < p.size(); ++i) {
      acc += p[i];
      out[i] = static_cast<double>(acc);
    }
    if (!out.empty()) out.back() = 1.0;
    return out;
  }
};

// Builds a normalized distribution from log weights.  norm_defect records
// how far the raw mass was from 1 (callers constructing an already-normalized
// law use it as a consistency measure; for arbitrary weights it is ignored).
inline DiscreteDist from_log_weights(std::int64_t k0,
                                     std::span<const double> logw) {
  if (logw.empty()) raise(errc::empty_input, "from_log_weights: no atoms");
  DiscreteDist d;
  d.k0 = k0;
  const double total = num::logsumexp(logw);
  if (std::isnan(total) || total == num::kNegInf)
    raise(errc::domain, "from_log_weights: weights carry no mass");
  d.norm_defect = std::expm1(total);
  d.logp.resize(logw.size());
  d.p.resize(logw.size());
  for (std::size_t i = 0; i < logw.size(); ++i) {
    d.logp[i] = logw[i] - total;
    d.p[i] = std::exp(d.logp[i]);
  }
  return d;
}

inline DiscreteDist point_mass(std::int64_t k) {
  DiscreteDist d;
  d.k0 = k;
  d.p = {1.0};
  d.logp = {0.0};
  return d;
}

// Total variation distance, union support.
inline double tv_distance(const DiscreteDist& a, const DiscreteDist& b) {
  const std::int64_t lo = std::min(a.k0, b.k0);
  const std::int64_t hi =
      std::max(a.k0 + static_cast<std::int64_t>(a.size()),
               b.k0 + static_cast<std::int64_t>(b.size()));
  long double acc = 0.0L;
  for (std::int64_t k = lo; k < hi; ++k) {
    const std::int64_t ia = k - a.k0;
    const std::int64_t ib = k - b.k0;
    const double pa =
        (ia >= 0 && ia < static_cast<std::int64_t>(a.size())) ? a.p[ia] : 0.0;
    const double pb =
        (ib >= 0 && ib < static_cast<std::int64_t>(b.size())) ? b.p[ib] : 0.0;
    acc += std::fabs(pa - pb);
  }
  return 0.5 * static_cast<double>(acc);
}

}  // namespace epkn::dist
