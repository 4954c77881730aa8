#include "epkn/gfc.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

namespace gfc = epkn::gfc;

namespace {

// Alternating-sum definition evaluated exactly.  With alpha = t/10 the sum
//   C(n,k;a) = (1/k!) sum_{i=0}^{k} (-1)^i binom(k,i) [-i a]_(n)
// becomes integer arithmetic over the denominator k! 10^n:
//   [-i t/10]_(n) = 10^{-n} prod_{j=0}^{n-1} (10 j - i t),
// and for n <= 12 every intermediate fits comfortably in __int128, so the
// oracle is exact up to the final long double conversion.
long double gfc_alternating_tenths(int n, int k, int alpha_tenths) {
  auto rising_scaled = [&](int i) {
    __int128 p = 1;
    for (int j = 0; j < n; ++j) p *= (10 * j - i * alpha_tenths);
    return p;
  };
  __int128 sum = 0;
  long long binom = 1;  // binom(k,i), updated incrementally
  for (int i = 0; i <= k; ++i) {
    const __int128 term = static_cast<__int128>(binom) * rising_scaled(i);
    sum += (i % 2 == 0) ? term : -term;
    binom = binom * (k - i) / (i + 1);
  }
  long double denom = 1.0L;
  for (int t = 2; t <= k; ++t) denom *= t;
  for (int t = 0; t < n; ++t) denom *= 10.0L;
  return static_cast<long double>(sum) / denom;
}

TEST(GfcTable, MatchesAlternatingSumOracle) {
  for (int tenths = 1; tenths <= 9; ++tenths) {
    const double alpha = tenths / 10.0;
    const auto table = gfc::build_table(alpha, 12);
    for (int n = 1; n <= 12; ++n) {
      for (int k = 1; k <= n; ++k) {
        const long double oracle = gfc_alternating_tenths(n, k, tenths);
        ASSERT_GT(oracle, 0.0L);
        const double got = std::exp(table.log_at(n, k));
        EXPECT_NEAR(got, static_cast<double>(oracle),
                    1e-9 * static_cast<double>(oracle))
            << "n=" << n << " k=" << k << " alpha=" << alpha;
      }
    }
  }
}

TEST(GfcTable, ClosedFormAnchors) {
  const auto table = gfc::build_table(0.5, 6);
  EXPECT_NEAR(std::exp(table.log_at(1, 1)), 0.5, 1e-15);
  EXPECT_NEAR(std::exp(table.log_at(2, 1)), 0.5 * 0.5, 1e-15);
  EXPECT_NEAR(std::exp(table.log_at(2, 2)), 0.25, 1e-15);
  EXPECT_NEAR(std::exp(table.log_at(3, 2)), 0.375, 1e-15);
}

TEST(GfcTable, DiagonalAndSupportEdges) {
  const double alpha = 0.37;
  const auto table = gfc::build_table(alpha, 40);
  for (int n = 1; n <= 40; ++n)
    EXPECT_NEAR(table.log_at(n, n), n * std::log(alpha), 1e-12 * n);
  EXPECT_EQ(table.log_at(5, 0), epkn::num::kNegInf);
  EXPECT_EQ(table.log_at(5, 6), epkn::num::kNegInf);
  EXPECT_EQ(table.log_at(4, 4), gfc::log_gfc(table, 4, 4));
  EXPECT_THROW(table.log_at(41, 1), epkn::error);
  EXPECT_THROW(table.log_at(0, 0), epkn::error);
}

TEST(GfcTable, DomainAndCapacityGuards) {
  EXPECT_THROW(gfc::build_table(0.0, 5), epkn::error);
  EXPECT_THROW(gfc::build_table(1.0, 5), epkn::error);
  EXPECT_THROW(gfc::build_table(-0.2, 5), epkn::error);
  EXPECT_THROW(gfc::build_table(0.5, gfc::kFullTableMax + 1), epkn::error);
  std::vector<std::int64_t> cps = {gfc::kStreamMax + 1};
  EXPECT_THROW(
      gfc::stream_scaled_rows(0.5, cps, [](auto, auto) {}), epkn::error);
}

TEST(ScaledRows, AlphaZeroGivesUnsignedStirlingFirstKind) {
  // |s(n,k)| spot values and the row-sum identity sum_k |s(n,k)| = n!.
  const auto row4 = gfc::scaled_row(0.0, 4);
  EXPECT_NEAR(std::exp(row4[0]), 6.0, 1e-12);   // |s(4,1)| = 3!
  EXPECT_NEAR(std::exp(row4[1]), 11.0, 1e-12);
  EXPECT_NEAR(std::exp(row4[2]), 6.0, 1e-12);
  EXPECT_NEAR(std::exp(row4[3]), 1.0, 1e-12);
  const auto row6 = gfc::scaled_row(0.0, 6);
  EXPECT_NEAR(std::exp(row6[0]), 120.0, 1e-10);
  double total = 0.0;
  for (double lv : row6) total += std::exp(lv);
  EXPECT_NEAR(total, 720.0, 1e-9);
}

TEST(ScaledRows, StreamingMatchesFullTable) {
  const double alpha = 0.6;
  const auto table = gfc::build_table(alpha, 500);
  std::vector<std::int64_t> cps = {1, 7, 128, 500};
  gfc::stream_scaled_rows(
      alpha, cps, [&](std::int64_t n, std::span<const double> v) {
        for (std::int64_t k = 1; k <= n; ++k) {
          const double from_table =
              table.log_at(n, k) - k * std::log(alpha);
          EXPECT_NEAR(v[k - 1], from_table, 1e-12 * std::max(1.0, std::fabs(from_table)));
        }
      });
}

TEST(ScaledRows, CheckpointValidation) {
  std::vector<std::int64_t> bad = {5, 5};
  EXPECT_THROW(gfc::stream_scaled_rows(0.5, bad, [](auto, auto) {}),
               epkn::error);
  std::vector<std::int64_t> unsorted = {7, 3};
  EXPECT_THROW(gfc::stream_scaled_rows(0.5, unsorted, [](auto, auto) {}),
               epkn::error);
}

TEST(GfcTable, RowLogConcavity) {
  // No sign error ever shows up as a concavity violation along a row.
  for (double alpha : {0.3, 0.7}) {
    const auto table = gfc::build_table(alpha, 500);
    for (std::int64_t n : {50, 200, 500}) {
      for (std::int64_t k = 2; k < n; ++k) {
        const double mid = 2.0 * table.log_at(n, k);
        const double sides = table.log_at(n, k - 1) + table.log_at(n, k + 1);
        EXPECT_LE(sides, mid + 1e-9) << "n=" << n << " k=" << k;
      }
    }
  }
}

TEST(Cache, RoundTripIsExact) {
  namespace fs = std::filesystem;
  const auto table = gfc::build_table(0.5, 60);
  const std::string path =
      (fs::temp_directory_path() / "epkn_gfc_cache_test.bin").string();
  gfc::save_cache(table, path);
  const auto loaded = gfc::load_cache(path);
  EXPECT_EQ(loaded.alpha(), table.alpha());
  EXPECT_EQ(loaded.n_max(), table.n_max());
  for (std::int64_t n = 1; n <= 60; ++n)
    for (std::int64_t k = 1; k <= n; ++k)
      EXPECT_EQ(loaded.log_at(n, k), table.log_at(n, k));
  fs::remove(path);
}

TEST(Cache, RejectsCorruptHeadersAndSizes) {
  namespace fs = std::filesystem;
  const auto table = gfc::build_table(0.4, 10);
  const std::string path =
      (fs::temp_directory_path() / "epkn_gfc_cache_bad.bin").string();
  gfc::save_cache(table, path);

  auto clobber = [&](std::streamoff off, char byte) {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(off);
    f.write(&byte, 1);
  };

  clobber(0, 'X');  // magic
  EXPECT_THROW(gfc::load_cache(path), epkn::error);
  gfc::save_cache(table, path);
  clobber(8, 9);  // version
  EXPECT_THROW(gfc::load_cache(path), epkn::error);

  gfc::save_cache(table, path);
  fs::resize_file(path, fs::file_size(path) - 8);  // truncated payload
  EXPECT_THROW(gfc::load_cache(path), epkn::error);

  gfc::save_cache(table, path);
  {
    std::ofstream f(path, std::ios::app | std::ios::binary);
    f.write("????", 4);  // trailing bytes
  }
  EXPECT_THROW(gfc::load_cache(path), epkn::error);

  EXPECT_THROW(gfc::load_cache("/nonexistent/epkn.bin"), epkn::error);
  fs::remove(path);
}

}  // namespace
