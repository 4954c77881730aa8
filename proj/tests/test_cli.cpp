// End-to-end tests for the epkn tool.  The binary path arrives in EPKN_BIN
// and the golden directory in EPKN_GOLDEN; both are set by the build.

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace {

std::string bin_path() {
  const char* p = std::getenv("EPKN_BIN");
  EXPECT_NE(p, nullptr) << "EPKN_BIN not set";
  return p == nullptr ? "" : p;
}

std::string golden_dir() {
  const char* p = std::getenv("EPKN_GOLDEN");
  EXPECT_NE(p, nullptr) << "EPKN_GOLDEN not set";
  return p == nullptr ? "" : p;
}

// Runs the tool through the shell; returns the exit code.  `env_prefix`
// lets a test pin environment variables for one invocation.
int run_tool(const std::string& args, const std::string& env_prefix = "") {
  std::string cmd = env_prefix.empty() ? "" : env_prefix + " ";
  cmd += bin_path() + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  EXPECT_TRUE(f.good()) << "cannot read " << path;
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct CsvTable {
  std::string header_comment;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.header_comment = line;
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (t.columns.empty())
      t.columns = cells;
    else
      t.rows.push_back(cells);
  }
  return t;
}

std::string tmp_file(const std::string& name) {
  return testing::TempDir() + name;
}

TEST(Golden, PmfOutputsAreBytePinned) {
  const struct {
    const char* args;
    const char* golden;
  } cases[] = {
      {"pmf --alpha 0.5 --lambda 1 --n 16", "pmf_alpha05_lambda1_n16.csv"},
      {"pmf --alpha 0 --lambda 1 --n 8", "pmf_alpha0_lambda1_n8.csv"},
  };
  for (const auto& c : cases) {
    const std::string out = tmp_file("golden_pmf.csv");
    ASSERT_EQ(run_tool(std::string(c.args) + " --out " + out), 0);
    EXPECT_EQ(read_file(out), read_file(golden_dir() + "/" + c.golden))
        << c.golden;
  }
}

TEST(Golden, ConstantsOutputsAreBytePinned) {
  const struct {
    const char* args;
    const char* golden;
  } cases[] = {
      {"constants --alpha 0.5 --lambda 1", "constants_alpha05_lambda1.json"},
      {"constants --alpha 0 --lambda 1", "constants_alpha0_lambda1.json"},
  };
  for (const auto& c : cases) {
    const std::string out = tmp_file("golden_constants.json");
    ASSERT_EQ(run_tool(std::string(c.args) + " --out " + out), 0);
    EXPECT_EQ(read_file(out), read_file(golden_dir() + "/" + c.golden))
        << c.golden;
  }
}

TEST(Pmf, TwoItemLawSingleRowAndNormalization) {
  const std::string out = tmp_file("pmf_small.csv");
  ASSERT_EQ(run_tool("pmf --alpha 0 --lambda 1 --n 2 --out " + out), 0);
  CsvTable t = parse_csv(read_file(out));
  ASSERT_EQ(t.columns, (std::vector<std::string>{"k", "prob", "log_prob"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][0], "1");
  EXPECT_NEAR(std::stod(t.rows[0][1]), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(std::stod(t.rows[1][1]), 2.0 / 3.0, 1e-12);

  ASSERT_EQ(run_tool("pmf --alpha 0 --lambda 1 --n 1 --out " + out), 0);
  t = parse_csv(read_file(out));
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0][0], "1");
  EXPECT_DOUBLE_EQ(std::stod(t.rows[0][1]), 1.0);

  ASSERT_EQ(run_tool("pmf --alpha 0.3 --lambda 2 --n 40 --out " + out), 0);
  t = parse_csv(read_file(out));
  ASSERT_EQ(t.rows.size(), 40u);
  double sum = 0.0;
  for (const auto& row : t.rows) {
    const double p = std::stod(row[1]);
    const double lp = std::stod(row[2]);
    sum += p;
    if (p > 1e-300) {
      EXPECT_NEAR(std::log(p), lp, 1e-12);
    }
  }
  EXPECT_NEAR(sum, 1.0, 1e-10);
}

TEST(Sample, SameSeedGivesIdenticalFilesAcrossThreadCounts) {
  const std::string a = tmp_file("sample_a.csv");
  const std::string b = tmp_file("sample_b.csv");
  const std::string args =
      "sample --route crp --alpha 0.5 --lambda 1 --n 64 --draws 4000 "
      "--seed 42 --out ";
  ASSERT_EQ(run_tool(args + a), 0);
  ASSERT_EQ(run_tool(args + b), 0);
  EXPECT_EQ(read_file(a), read_file(b));
  ASSERT_EQ(run_tool(args + b, "EP_LAB_THREADS=3"), 0);
  EXPECT_EQ(read_file(a), read_file(b)) << "thread count changed the draws";
  const CsvTable t = parse_csv(read_file(a));
  EXPECT_NE(t.header_comment.find("route=crp"), std::string::npos);
  EXPECT_NE(t.header_comment.find("seed=42"), std::string::npos);
  ASSERT_EQ(t.rows.size(), 4000u);
}

TEST(Sample, CrpTwoItemMeanMatchesEnumeration) {
  // theta = 2 at n = 2: P(k=1) = 1/3, P(k=2) = 2/3, so E[k] = 5/3 and
  // Var[k] = 2/9.
  const std::string out = tmp_file("sample_mean.csv");
  ASSERT_EQ(run_tool("sample --route crp --alpha 0 --lambda 1 --n 2 "
                     "--draws 1000000 --seed 5 --out " +
                     out),
            0);
  const CsvTable t = parse_csv(read_file(out));
  ASSERT_EQ(t.rows.size(), 1000000u);
  double sum = 0.0;
  for (const auto& row : t.rows) sum += std::stod(row[0]);
  const double mean = sum / 1e6;
  const double stderr_mean = std::sqrt(2.0 / 9.0 / 1e6);
  EXPECT_NEAR(mean, 5.0 / 3.0, 3.0 * stderr_mean);
}

TEST(Sample, RouteAndUsageErrorsExitWithTwo) {
  EXPECT_EQ(run_tool("sample --route bernoulli --alpha 0.5 --lambda 1 "
                     "--n 10 --draws 5"),
            2);
  EXPECT_EQ(run_tool("sample --route warp --alpha 0 --lambda 1 --n 10"), 2);
  EXPECT_EQ(run_tool("sample --alpha 0 --lambda 1 --n 10"), 2);
  EXPECT_EQ(run_tool("pmf --lambda 1 --n 4"), 2);
  EXPECT_EQ(run_tool("pmf --alpha 1.5 --lambda 1 --n 4"), 2);
  EXPECT_EQ(run_tool("frobnicate"), 2);
  EXPECT_EQ(run_tool("sample --route crp --alpha 0 --lambda 1 --n 2 "
                     "--draws 5",
                     "EP_LAB_THREADS=nope"),
            2);
}

TEST(Verify, CoherenceSuiteEmitsSchemaAndPasses) {
  const std::string out = tmp_file("verify_coh.json");
  ASSERT_EQ(run_tool("verify --suite coherence --alpha 0.5 --lambda 1 "
                     "--out " +
                     out),
            0);
  const auto doc = nlohmann::json::parse(read_file(out));
  EXPECT_EQ(doc.at("schema_version").get<int>(), 1);
  EXPECT_EQ(doc.at("config").at("suite").get<std::string>(), "coherence");
  EXPECT_DOUBLE_EQ(doc.at("config").at("alpha").get<double>(), 0.5);
  const auto& reports = doc.at("reports");
  ASSERT_EQ(reports.size(), 2u);
  for (const auto& r : reports) {
    EXPECT_EQ(r.at("experiment").get<std::string>(), "COHERENCE");
    EXPECT_TRUE(r.at("passed").get<bool>());
  }
}

TEST(Verify, CsvFormatCarriesHeaderAndAllRows) {
  const std::string out = tmp_file("verify_m4.csv");
  ASSERT_EQ(run_tool("verify --suite moments4 --alpha 0.5 --lambda 1 "
                     "--format csv --out " +
                     out),
            0);
  const std::string text = read_file(out);
  const CsvTable t = parse_csv(text);
  EXPECT_NE(t.header_comment.find("suite=moments4"), std::string::npos);
  ASSERT_FALSE(t.columns.empty());
  EXPECT_EQ(t.columns[0], "experiment");
  EXPECT_GE(t.rows.size(), 10u);
  EXPECT_EQ(text.find("false"), std::string::npos);
}

TEST(Verify, UnknownSuiteAndBadFormatExitWithTwo) {
  EXPECT_EQ(run_tool("verify --suite nonsense"), 2);
  EXPECT_EQ(run_tool("verify --suite coherence --format yaml"), 2);
  EXPECT_EQ(run_tool("verify --suite coherence --alpha 0.5"), 2);
}

TEST(Config, FileSuppliesDefaultsAndFlagsWin) {
  const std::string cfg = tmp_file("cfg.json");
  {
    std::ofstream f(cfg);
    f << R"({"alpha": 0.5, "lambda": 1, "n": 4})" << "\n";
  }
  const std::string out = tmp_file("cfg_pmf.csv");
  ASSERT_EQ(run_tool("pmf --config " + cfg + " --out " + out), 0);
  EXPECT_EQ(parse_csv(read_file(out)).rows.size(), 4u);
  ASSERT_EQ(run_tool("pmf --config " + cfg + " --n 2 --out " + out), 0);
  EXPECT_EQ(parse_csv(read_file(out)).rows.size(), 2u);

  const std::string bad = tmp_file("cfg_bad.json");
  {
    std::ofstream f(bad);
    f << R"({"alpha": 0.5, "bogus": 1})" << "\n";
  }
  EXPECT_EQ(run_tool("pmf --config " + bad + " --lambda 1 --n 2"), 2);
  EXPECT_EQ(run_tool("pmf --config " + tmp_file("missing.json") +
                     " --alpha 0 --lambda 1 --n 2"),
            2);
}

TEST(Config, GfcCacheSpeedsRepeatsWithoutChangingBytes) {
  const std::string cache = tmp_file("triangle.bin");
  std::remove(cache.c_str());
  const std::string a = tmp_file("cache_a.csv");
  const std::string b = tmp_file("cache_b.csv");
  const std::string args =
      "pmf --alpha 0.5 --lambda 1 --n 60 --gfc-cache " + cache + " --out ";
  ASSERT_EQ(run_tool(args + a), 0);
  std::ifstream probe(cache, std::ios::binary);
  EXPECT_TRUE(probe.good()) << "cache file was not created";
  ASSERT_EQ(run_tool(args + b), 0);
  EXPECT_EQ(read_file(a), read_file(b));
  EXPECT_EQ(run_tool("pmf --alpha 0 --lambda 1 --n 4 --gfc-cache " + cache),
            2);
}

}  // namespace
