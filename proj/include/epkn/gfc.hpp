#pragma once

// Generalized factorial coefficients C(n,k;alpha) in log space.
//
// Everything runs on the scaled values D(n,k) = C(n,k;alpha)/alpha^k, whose
// triangular recursion
//
//   D(n+1,k) = (n - k*alpha) D(n,k) + D(n,k-1),   D(1,1) = 1
//
// has nonnegative coefficients for alpha in [0,1) (n - k*alpha >= n(1-alpha)
// for k <= n), so the log-sum-exp execution never cancels.  The scaling also
// makes alpha = 0 a regular point: there D(n,k) = |s(n,k)|, the unsigned
// Stirling numbers of the first kind, which is exactly the row the alpha = 0
// block-count law needs.  The alternating-sum definition of C is reserved for
// small-n test oracles; it cancels catastrophically for large n.

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"

namespace epkn::gfc {

// Full-triangle builds are quadratic in memory; past this size only the
// streaming single-row mode is offered.
inline constexpr std::int64_t kFullTableMax = 20000;
inline constexpr std::int64_t kStreamMax = 100000;

namespace detail {

// Advances v from row n (v[k-1] = ln D(n,k), size n) to row n+1 in place.
inline void step_scaled_row(std::vector<double>& v, std::int64_t n,
                            double alpha) {
  const double nd = static_cast<double>(n);
  v.push_back(v[n - 1]);  // k = n+1 has only the carry term, D(n+1,n+1)=D(n,n)
  for (std::int64_t k = n; k >= 2; --k) {
    const double grow = std::log(nd - k * alpha) + v[k - 1];
    v[k - 1] = num::logsumexp(grow, v[k - 2]);
  }
  v[0] += std::log(nd - alpha);
}

inline void check_alpha_unit(double alpha) {
  if (!(alpha >= 0.0) || alpha >= 1.0)
    raise(errc::domain, "gfc: alpha must lie in [0,1)");
}

}  // namespace detail

// Streams ln D(n,k) rows upward and hands each requested row to the sink as
// (n, span of n entries).  checkpoints must be sorted ascending, >= 1.
// Memory stays O(max checkpoint).
template <typename Sink>
void stream_scaled_rows(double alpha, std::span<const std::int64_t> checkpoints,
                        Sink&& sink) {
  detail::check_alpha_unit(alpha);
  if (checkpoints.empty()) return;
  const std::int64_t top = checkpoints.back();
  if (top < 1 || top > kStreamMax)
    raise(errc::capacity, "gfc: streaming pass limited to n <= 100000");
  for (std::size_t i = 1; i < checkpoints.size(); ++i)
    if (checkpoints[i] <= checkpoints[i - 1])
      raise(errc::domain, "gfc: checkpoints must be strictly increasing");

  std::vector<double> row = {0.0};  // ln D(1,1)
  std::size_t next = 0;
  for (std::int64_t n = 1; n <= top; ++n) {
    if (n > 1) detail::step_scaled_row(row, n - 1, alpha);
    if (next < checkpoints.size() && checkpoints[next] == n) {
      sink(n, std::span<const double>(row.data(), static_cast<std::size_t>(n)));
      ++next;
    }
  }
}

// Single row ln D(n,k), k = 1..n.
inline std::vector<double> scaled_row(double alpha, std::int64_t n) {
  std::vector<double> out;
  const std::int64_t cps[1] = {n};
  stream_scaled_rows(alpha, cps, [&](std::int64_t, std::span<const double> v) {
    out.assign(v.begin(), v.end());
  });
  return out;
}

// Immutable triangle of ln C(n,k;alpha) for alpha in (0,1).  Entry (n,k) is
// finite for 1 <= k <= n; the k = 0 column (zero by definition for n >= 1)
// is reported as -inf rather than stored.
class LogGfcTable {
 public:
  LogGfcTable(double alpha, std::int64_t n_max, std::vector<double> rows)
      : alpha_(alpha), n_max_(n_max), rows_(std::move(rows)) {}

  double alpha() const { return alpha_; }
  std::int64_t n_max() const { return n_max_; }

  double log_at(std::int64_t n, std::int64_t k) const {
    if (n < 1 || n > n_max_)
      raise(errc::index, "gfc: row " + std::to_string(n) + " not in table");
    if (k < 1 || k > n) return num::kNegInf;
    return rows_[static_cast<std::size_t>(n * (n - 1) / 2 + (k - 1))];
  }

  const std::vector<double>& raw_rows() const { return rows_; }

 private:
  double alpha_;
  std::int64_t n_max_;
  std::vector<double> rows_;  // row n at offset n(n-1)/2, entries k = 1..n
};

inline LogGfcTable build_table(double alpha, std::int64_t n_max) {
  detail::check_alpha_unit(alpha);
  if (alpha == 0.0)
    raise(errc::domain, "gfc: alpha = 0 has no finite C(n,k;alpha) table");
  if (n_max < 1 || n_max > kFullTableMax)
    raise(errc::capacity,
          "gfc: full table limited to n_max <= 20000; use streaming rows");
  const double ln_alpha = std::log(alpha);
  std::vector<double> rows(
      static_cast<std::size_t>(n_max * (n_max + 1) / 2));
  std::vector<std::int64_t> cps(static_cast<std::size_t>(n_max));
  for (std::int64_t n = 1; n <= n_max; ++n) cps[n - 1] = n;
  stream_scaled_rows(alpha, cps, [&](std::int64_t n, std::span<const double> v) {
    double* dst = rows.data() + n * (n - 1) / 2;
    for (std::int64_t k = 1; k <= n; ++k) dst[k - 1] = v[k - 1] + k * ln_alpha;
  });
  return LogGfcTable(alpha, n_max, std::move(rows));
}

inline double log_gfc(const LogGfcTable& table, std::int64_t n,
                      std::int64_t k) {
  return table.log_at(n, k);
}

// Binary cache.  Fixed 32-byte header, native little-endian:
//   bytes  0..7   magic "EPGFCTBL"
//   bytes  8..11  uint32 version (currently 1)
//   bytes 12..15  uint32 reserved (zero)
//   bytes 16..23  double alpha
//   bytes 24..31  uint64 n_max
// followed by n_max(n_max+1)/2 doubles: rows in increasing n, entries k=1..n.
inline constexpr char kCacheMagic[8] = {'E', 'P', 'G', 'F', 'C', 'T', 'B', 'L'};
inline constexpr std::uint32_t kCacheVersion = 1;

inline void save_cache(const LogGfcTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(errc::io, "gfc: cannot open cache for writing: " + path);
  const std::uint32_t version = kCacheVersion;
  const std::uint32_t reserved = 0;
  const double alpha = table.alpha();
  const std::uint64_t n_max = static_cast<std::uint64_t>(table.n_max());
  out.write(kCacheMagic, 8);
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&reserved), 4);
  out.write(reinterpret_cast<const char*>(&alpha), 8);
  out.write(reinterpret_cast<const char*>(&n_max), 8);
  const auto& rows = table.raw_rows();
  out.write(reinterpret_cast<const char*>(rows.data()),
            static_cast<std::streamsize>(rows.size() * sizeof(double)));
  if (!out) raise(errc::io, "gfc: short write to cache: " + path);
}

inline LogGfcTable load_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(errc::io, "gfc: cannot open cache: " + path);
  char magic[8];
  std::uint32_t version = 0, reserved = 1;
  double alpha = 0.0;
  std::uint64_t n_max = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&reserved), 4);
  in.read(reinterpret_cast<char*>(&alpha), 8);
  in.read(reinterpret_cast<char*>(&n_max), 8);
  if (!in || std::memcmp(magic, kCacheMagic, 8) != 0)
    raise(errc::config, "gfc: not a coefficient cache: " + path);
  if (version != kCacheVersion || reserved != 0)
    raise(errc::config, "gfc: unsupported cache version in " + path);
  if (!(alpha > 0.0 && alpha < 1.0))
    raise(errc::config, "gfc: cache alpha outside (0,1) in " + path);
  if (n_max < 1 || n_max > static_cast<std::uint64_t>(kFullTableMax))
    raise(errc::config, "gfc: cache n_max outside guard in " + path);
  const std::size_t count = static_cast<std::size_t>(n_max * (n_max + 1) / 2);
  std::vector<double> rows(count);
  in.read(reinterpret_cast<char*>(rows.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in || in.gcount() !=
                 static_cast<std::streamsize>(count * sizeof(double)))
    raise(errc::config, "gfc: cache truncated: " + path);
  in.peek();
  if (!in.eof()) raise(errc::config, "gfc: trailing bytes in cache: " + path);
  return LogGfcTable(alpha, static_cast<std::int64_t>(n_max), std::move(rows));
}

}  // namespace epkn::gfc
