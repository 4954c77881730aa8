// Command-line front end: pmf / constants / sample / verify.
//
// Exit codes: 0 success, 1 failed check, 2 usage or config error.  Every
// output begins with a header recording the resolved parameters (a `#`
// comment line for CSV, a config object for JSON), so a run can be
// reproduced from its artifact alone.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "epkn/cpr.hpp"
#include "epkn/dist.hpp"
#include "epkn/errors.hpp"
#include "epkn/gfc.hpp"
#include "epkn/model.hpp"
#include "epkn/rng.hpp"
#include "epkn/samplers.hpp"
#include "epkn/verify.hpp"

namespace {

using namespace epkn;
using nlohmann::json;

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// precision / coherence failures mean a check did not hold (exit 1);
// everything else raised by the library is a bad request (exit 2).
int exit_code_for(errc code) {
  switch (code) {
    case errc::precision:
    case errc::coherence_violation:
      return 1;
    default:
      return 2;
  }
}

int resolve_threads() {
  const char* env = std::getenv("EP_LAB_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1 || v > 64)
    raise(errc::config, "EP_LAB_THREADS must be an integer in [1, 64]");
  return static_cast<int>(v);
}

// Options after merging command line and config file; unset fields fall
// back to per-command defaults.
struct Opts {
  std::optional<double> alpha, lambda, n_factor, trunc_tol;
  std::optional<std::int64_t> n, n_min, n_max, draws;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> route, suite, out, format, gfc_cache;
};

json load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) raise(errc::config, "cannot open config file: " + path);
  json cfg;
  try {
    cfg = json::parse(f);
  } catch (const std::exception& e) {
    raise(errc::config, std::string("config parse error: ") + e.what());
  }
  if (!cfg.is_object()) raise(errc::config, "config root must be a JSON object");
  static constexpr const char* kKnown[] = {
      "alpha", "lambda", "n",      "n-min",  "n-max",     "n-factor",
      "draws", "seed",   "route",  "suite",  "out",       "format",
      "trunc-tol",       "gfc-cache"};
  for (const auto& item : cfg.items()) {
    bool known = false;
    for (const char* k : kKnown) known = known || item.key() == k;
    if (!known) raise(errc::config, "unknown config key: " + item.key());
  }
  return cfg;
}

template <typename T>
void merge_key(std::optional<T>& dst, const json& cfg, const char* key) {
  if (dst.has_value()) return;  // command-line flag wins
  const auto it = cfg.find(key);
  if (it == cfg.end() || it->is_null()) return;
  try {
    dst = it->get<T>();
  } catch (const std::exception&) {
    raise(errc::config, std::string("config: bad value for \"") + key + "\"");
  }
}

void merge_config(Opts& o, const json& cfg) {
  merge_key(o.alpha, cfg, "alpha");
  merge_key(o.lambda, cfg, "lambda");
  merge_key(o.n, cfg, "n");
  merge_key(o.n_min, cfg, "n-min");
  merge_key(o.n_max, cfg, "n-max");
  merge_key(o.n_factor, cfg, "n-factor");
  merge_key(o.draws, cfg, "draws");
  merge_key(o.seed, cfg, "seed");
  merge_key(o.route, cfg, "route");
  merge_key(o.suite, cfg, "suite");
  merge_key(o.out, cfg, "out");
  merge_key(o.format, cfg, "format");
  merge_key(o.trunc_tol, cfg, "trunc-tol");
  merge_key(o.gfc_cache, cfg, "gfc-cache");
}

template <typename T>
T require_opt(const std::optional<T>& v, const char* cmd, const char* flag) {
  if (!v)
    raise(errc::usage,
          std::string(cmd) + ": missing required option " + flag);
  return *v;
}

void write_output(const std::optional<std::string>& out,
                  const std::string& text) {
  if (!out || out->empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream f(*out, std::ios::binary);
  if (!f) raise(errc::io, "cannot open output file: " + *out);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  f.flush();
  if (!f) raise(errc::io, "write failed: " + *out);
}

std::vector<std::int64_t> geometric_grid(std::int64_t lo, std::int64_t hi,
                                         double factor) {
  if (lo < 1 || hi < lo)
    raise(errc::config, "empty n range: require 1 <= n-min <= n-max");
  if (!(factor > 1.0)) raise(errc::config, "--n-factor must exceed 1");
  std::vector<std::int64_t> grid;
  for (std::int64_t v = lo; v <= hi;) {
    grid.push_back(v);
    const std::int64_t next = std::llround(static_cast<double>(v) * factor);
    v = (next > v) ? next : v + 1;
  }
  return grid;
}

// ---- pmf ----

dist::DiscreteDist pmf_with_cache(const model::ModelParams& params,
                                  const std::string& path) {
  if (params.alpha == 0.0)
    raise(errc::config, "--gfc-cache requires alpha in (0, 1)");
  std::optional<gfc::LogGfcTable> table;
  if (std::ifstream probe(path); probe.good()) {
    try {
      gfc::LogGfcTable loaded = gfc::load_cache(path);
      if (loaded.alpha() == params.alpha && loaded.n_max() >= params.n)
        table.emplace(std::move(loaded));
    } catch (const error& e) {
      std::fprintf(stderr, "epkn: rebuilding gfc cache (%s)\n", e.what());
    }
  }
  if (!table) {
    table.emplace(gfc::build_table(params.alpha, params.n));
    gfc::save_cache(*table, path);
  }
  const double ln_alpha = std::log(params.alpha);
  std::vector<double> row(static_cast<std::size_t>(params.n));
  for (std::int64_t k = 1; k <= params.n; ++k)
    row[static_cast<std::size_t>(k - 1)] =
        table->log_at(params.n, k) - static_cast<double>(k) * ln_alpha;
  return model::pmf_kn_from_row(params, row);
}

int run_pmf(const Opts& o) {
  const model::ModelParams params{require_opt(o.alpha, "pmf", "--alpha"),
                                  require_opt(o.lambda, "pmf", "--lambda"),
                                  require_opt(o.n, "pmf", "--n")};
  params.validate();
  const dist::DiscreteDist d = o.gfc_cache
                                   ? pmf_with_cache(params, *o.gfc_cache)
                                   : model::pmf_kn(params);
  std::string text = "# command=pmf alpha=" + g17(params.alpha) +
                     " lambda=" + g17(params.lambda) +
                     " n=" + std::to_string(params.n);
  if (o.gfc_cache) text += " gfc-cache=" + *o.gfc_cache;
  text += "\nk,prob,log_prob\n";
  for (std::size_t i = 0; i < d.p.size(); ++i) {
    text += std::to_string(d.k0 + static_cast<std::int64_t>(i));
    text += ',' + g17(d.p[i]);
    text += ',' + g17(d.logp[i]);
    text += '\n';
  }
  write_output(o.out, text);
  return 0;
}

// ---- constants ----

int run_constants(const Opts& o) {
  const double alpha = require_opt(o.alpha, "constants", "--alpha");
  const double lambda = require_opt(o.lambda, "constants", "--lambda");
  model::ModelParams{alpha, lambda, 1}.validate();
  std::string text = "{\n";
  text += "  \"alpha\": " + g17(alpha) + ",\n";
  text += "  \"lambda\": " + g17(lambda) + ",\n";
  text += "  \"m\": " + g17(model::mean_rate(alpha, lambda)) + ",\n";
  text += "  \"s2\": " + g17(model::var_rate(alpha, lambda)) + ",\n";
  if (alpha == 0.0) {
    text +=
        "  \"z0\": null,\n"
        "  \"Sigma2\": null,\n"
        "  \"tau0\": null,\n"
        "  \"mu0\": null,\n"
        "  \"sigma2_0\": null,\n"
        "  \"mu_prime0\": null,\n"
        "  \"coherence_residuals\": null\n";
  } else {
    const cpr::CprConstants c = cpr::cpr_constants(alpha, lambda);
    text += "  \"z0\": " + g17(c.z0) + ",\n";
    text += "  \"Sigma2\": " + g17(c.Sigma2) + ",\n";
    text += "  \"tau0\": " + g17(c.tau0) + ",\n";
    text += "  \"mu0\": " + g17(c.mu0) + ",\n";
    text += "  \"sigma2_0\": " + g17(c.sigma2_0) + ",\n";
    text += "  \"mu_prime0\": " + g17(c.mu_prime0) + ",\n";
    text += "  \"coherence_residuals\": {\"mean\": " + g17(c.residual_mean) +
            ", \"variance\": " + g17(c.residual_var) + "}\n";
  }
  text += "}\n";
  write_output(o.out, text);
  return 0;
}

// ---- sample ----

int run_sample(const Opts& o) {
  const std::string route = require_opt(o.route, "sample", "--route");
  const model::ModelParams params{require_opt(o.alpha, "sample", "--alpha"),
                                  require_opt(o.lambda, "sample", "--lambda"),
                                  require_opt(o.n, "sample", "--n")};
  params.validate();
  const std::int64_t draws = o.draws.value_or(1000);
  if (draws < 1) raise(errc::usage, "sample: --draws must be >= 1");
  const std::uint64_t seed = o.seed.value_or(0);
  const double trunc_tol = o.trunc_tol.value_or(1e-8);

  enum class Route { crp, bernoulli, stick, invcdf };
  Route r;
  if (route == "crp")
    r = Route::crp;
  else if (route == "bernoulli")
    r = Route::bernoulli;
  else if (route == "stick")
    r = Route::stick;
  else if (route == "invcdf")
    r = Route::invcdf;
  else
    raise(errc::usage, "sample: unknown route \"" + route +
                           "\" (expected crp|bernoulli|stick|invcdf)");
  if (r == Route::bernoulli && params.alpha != 0.0)
    raise(errc::usage, "sample: route=bernoulli requires alpha = 0");

  std::optional<samplers::DiscreteSampler> inv;
  if (r == Route::invcdf) inv.emplace(model::pmf_kn(params));

  // Draw i always uses stream {seed, i}, so the output is independent of
  // the worker count.
  std::vector<std::int64_t> ks(static_cast<std::size_t>(draws));
  auto run_chunk = [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) {
      const rng::RngStream s{seed, static_cast<std::uint64_t>(i)};
      const auto slot = static_cast<std::size_t>(i);
      switch (r) {
        case Route::crp:
          ks[slot] = samplers::sample_crp(params, s).k;
          break;
        case Route::bernoulli:
          ks[slot] = samplers::sample_bernoulli_sum(params, s);
          break;
        case Route::stick:
          ks[slot] = samplers::sample_stick_breaking(params, s, trunc_tol);
          break;
        case Route::invcdf: {
          rng::Pcg64 g(s);
          ks[slot] = (*inv)(g);
          break;
        }
      }
    }
  };
  const int threads = static_cast<int>(
      std::min<std::int64_t>(resolve_threads(), draws));
  if (threads <= 1) {
    run_chunk(0, draws);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(threads));
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      const std::int64_t lo = draws * t / threads;
      const std::int64_t hi = draws * (t + 1) / threads;
      pool.emplace_back([&run_chunk, &errs, t, lo, hi] {
        try {
          run_chunk(lo, hi);
        } catch (...) {
          errs[static_cast<std::size_t>(t)] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errs)
      if (e) std::rethrow_exception(e);
  }

  std::string text = "# command=sample route=" + route +
                     " alpha=" + g17(params.alpha) +
                     " lambda=" + g17(params.lambda) +
                     " n=" + std::to_string(params.n) +
                     " draws=" + std::to_string(draws) +
                     " seed=" + std::to_string(seed);
  if (r == Route::stick) text += " trunc-tol=" + g17(trunc_tol);
  text += "\nk\n";
  text.reserve(text.size() + static_cast<std::size_t>(draws) * 8);
  for (const std::int64_t k : ks) {
    text += std::to_string(k);
    text += '\n';
  }
  write_output(o.out, text);
  return 0;
}

// ---- verify ----

int run_verify(const Opts& o) {
  const std::string suite = o.suite.value_or("all");
  const bool all = suite == "all";
  const bool want_lln = all || suite == "lln";
  const bool want_clt = all || suite == "clt";
  const bool want_be = all || suite == "be";
  const bool want_coherence = all || suite == "coherence";
  const bool want_mixture = all || suite == "mixture";
  const bool want_moments4 = all || suite == "moments4";
  if (!(want_lln || want_clt || want_be || want_coherence || want_mixture ||
        want_moments4))
    raise(errc::usage, "verify: unknown suite \"" + suite +
                           "\" (expected lln|clt|be|coherence|mixture|"
                           "moments4|all)");
  const std::string format = o.format.value_or("json");
  if (format != "json" && format != "csv")
    raise(errc::usage, "verify: --format must be csv or json");
  if (o.alpha.has_value() != o.lambda.has_value())
    raise(errc::usage, "verify: --alpha and --lambda must be given together");
  const bool pair_given = o.alpha.has_value();
  const std::uint64_t seed = o.seed.value_or(0);

  using Pair = std::pair<double, double>;
  const std::vector<Pair> main_pairs =
      pair_given ? std::vector<Pair>{{*o.alpha, *o.lambda}}
                 : std::vector<Pair>{{0.0, 1.0}, {0.5, 1.0}, {0.3, 2.0}};
  const std::vector<Pair> moment_pairs =
      pair_given ? main_pairs
                 : std::vector<Pair>{{0.0, 1.0}, {0.5, 1.0}};

  std::vector<verify::VerificationReport> reports;
  auto absorb = [&reports](std::vector<verify::VerificationReport> v) {
    for (auto& r : v) reports.push_back(std::move(r));
  };

  if (want_lln) {
    const std::int64_t n = o.n.value_or(10'000);
    const std::int64_t draws = o.draws.value_or(10'000);
    std::vector<verify::GridPoint> grid;
    for (const auto& [a, l] : main_pairs)
      grid.push_back(verify::GridPoint::at(a, l, n));
    absorb(verify::run_lln(grid, draws, seed));
  }
  if (want_clt) {
    const auto ns = geometric_grid(o.n_min.value_or(128),
                                   o.n_max.value_or(8192),
                                   o.n_factor.value_or(2.0));
    std::vector<verify::GridPoint> grid;
    for (const auto& [a, l] : main_pairs)
      for (const std::int64_t n : ns)
        grid.push_back(verify::GridPoint::at(a, l, n));
    absorb(verify::run_clt(grid, 0, seed, verify::CltRoute::exact));
  }
  if (want_be) {
    const auto ns = geometric_grid(o.n_min.value_or(128),
                                   o.n_max.value_or(16'384),
                                   o.n_factor.value_or(2.0));
    for (const auto& [a, l] : main_pairs) {
      absorb(verify::run_be(a, l, ns, verify::BeTarget::block_count));
      if (a > 0.0)
        absorb(verify::run_be(a, l, ns, verify::BeTarget::tilted_count));
    }
  }
  if (want_coherence) {
    std::vector<double> alphas, lambdas;
    if (pair_given) {
      alphas = {*o.alpha};
      lambdas = {*o.lambda};
    } else {
      for (int i = 1; i <= 9; ++i) alphas.push_back(0.1 * i);
      lambdas = {0.1, 0.5, 1.0, 2.0, 10.0};
    }
    absorb(verify::run_coherence(alphas, lambdas));
  }
  if (want_mixture) {
    const Pair p = pair_given ? main_pairs.front() : Pair{0.5, 1.0};
    const std::vector<std::int64_t> ns =
        o.n ? std::vector<std::int64_t>{*o.n}
            : std::vector<std::int64_t>{50, 200};
    const std::int64_t draws = o.draws.value_or(100'000);
    for (const std::int64_t n : ns)
      reports.push_back(
          verify::run_mixture_check(p.first, p.second, n, draws, seed));
  }
  if (want_moments4) {
    const std::vector<std::int64_t> m4_grid{250, 500, 1000, 2000};
    const auto expansion_grid = geometric_grid(256, 65'536, 2.0);
    std::vector<std::int64_t> zn_grid;
    for (std::int64_t v = 100; v <= 51'200; v *= 2) zn_grid.push_back(v);
    zn_grid.push_back(100'000);
    for (const auto& [a, l] : moment_pairs) {
      absorb(verify::run_moment4(a, l, m4_grid));
      absorb(verify::run_moment_expansion(a, l, expansion_grid));
      if (a > 0.0) absorb(verify::run_zn_drift(a, l, zn_grid));
    }
  }

  bool all_passed = true;
  for (const auto& r : reports) all_passed = all_passed && r.passed;

  const auto opt_i = [](const std::optional<std::int64_t>& v) {
    return v ? std::to_string(*v) : std::string("null");
  };
  const auto opt_f = [](const std::optional<double>& v) {
    return v ? g17(*v) : std::string("null");
  };
  if (format == "json") {
    std::string cfg = "  \"config\": {\"suite\": \"" + suite + "\"";
    cfg += ", \"alpha\": " + opt_f(o.alpha);
    cfg += ", \"lambda\": " + opt_f(o.lambda);
    cfg += ", \"n\": " + opt_i(o.n);
    cfg += ", \"n-min\": " + opt_i(o.n_min);
    cfg += ", \"n-max\": " + opt_i(o.n_max);
    cfg += ", \"n-factor\": " + opt_f(o.n_factor);
    cfg += ", \"draws\": " + opt_i(o.draws);
    cfg += ", \"seed\": " + std::to_string(seed);
    cfg += ", \"format\": \"" + format + "\"},\n";
    std::string body = verify::to_json(reports);
    body.insert(body.find("  \"reports\": ["), cfg);
    write_output(o.out, body);
  } else {
    std::string head = "# command=verify suite=" + suite;
    head += " alpha=" + opt_f(o.alpha);
    head += " lambda=" + opt_f(o.lambda);
    head += " n=" + opt_i(o.n);
    head += " n-min=" + opt_i(o.n_min);
    head += " n-max=" + opt_i(o.n_max);
    head += " n-factor=" + opt_f(o.n_factor);
    head += " draws=" + opt_i(o.draws);
    head += " seed=" + std::to_string(seed);
    head += " format=" + format + "\n";
    write_output(o.out, head + verify::to_csv(reports));
  }
  return all_passed ? 0 : 1;
}

// ---- wiring ----

struct CmdOpts {
  CLI::App* cmd = nullptr;
  double alpha = 0, lambda = 0, n_factor = 0, trunc_tol = 0;
  std::int64_t n = 0, n_min = 0, n_max = 0, draws = 0;
  std::uint64_t seed = 0;
  std::string route, suite, out, format, gfc_cache, config;
  CLI::Option *o_alpha = nullptr, *o_lambda = nullptr, *o_n = nullptr,
              *o_n_min = nullptr, *o_n_max = nullptr, *o_n_factor = nullptr,
              *o_draws = nullptr, *o_seed = nullptr, *o_route = nullptr,
              *o_suite = nullptr, *o_out = nullptr, *o_format = nullptr,
              *o_trunc_tol = nullptr, *o_gfc_cache = nullptr,
              *o_config = nullptr;

  Opts collect() const {
    Opts o;
    const auto set = [](auto& dst, const CLI::Option* opt, const auto& val) {
      if (opt != nullptr && opt->count() > 0) dst = val;
    };
    set(o.alpha, o_alpha, alpha);
    set(o.lambda, o_lambda, lambda);
    set(o.n, o_n, n);
    set(o.n_min, o_n_min, n_min);
    set(o.n_max, o_n_max, n_max);
    set(o.n_factor, o_n_factor, n_factor);
    set(o.draws, o_draws, draws);
    set(o.seed, o_seed, seed);
    set(o.route, o_route, route);
    set(o.suite, o_suite, suite);
    set(o.out, o_out, out);
    set(o.format, o_format, format);
    set(o.trunc_tol, o_trunc_tol, trunc_tol);
    set(o.gfc_cache, o_gfc_cache, gfc_cache);
    if (o_config != nullptr && o_config->count() > 0)
      merge_config(o, load_config(config));
    return o;
  }
};

void add_model_flags(CmdOpts& c) {
  c.o_alpha = c.cmd->add_option("--alpha", c.alpha, "discount in [0, 1)");
  c.o_lambda =
      c.cmd->add_option("--lambda", c.lambda, "strength rate (theta = lambda n)");
}

void add_config_flag(CmdOpts& c) {
  c.o_config = c.cmd->add_option(
      "--config", c.config, "JSON file mirroring the flags; flags win");
}

void add_out_flag(CmdOpts& c) {
  c.o_out = c.cmd->add_option("--out", c.out, "output path (default stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Block-count model workbench: exact laws, limit constants, samplers, "
      "and numeric checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "epkn 0.1.0");

  CmdOpts pmf;
  pmf.cmd = app.add_subcommand("pmf", "Exact law of the block count as CSV");
  add_model_flags(pmf);
  pmf.o_n = pmf.cmd->add_option("--n", pmf.n, "sample size");
  pmf.o_gfc_cache = pmf.cmd->add_option(
      "--gfc-cache", pmf.gfc_cache,
      "triangle cache file (alpha in (0,1), n <= 20000)");
  add_out_flag(pmf);
  add_config_flag(pmf);

  CmdOpts constants;
  constants.cmd =
      app.add_subcommand("constants", "Limit constants and residuals as JSON");
  add_model_flags(constants);
  add_out_flag(constants);
  add_config_flag(constants);

  CmdOpts sample;
  sample.cmd = app.add_subcommand("sample", "Monte Carlo draws as CSV");
  sample.o_route = sample.cmd->add_option(
      "--route", sample.route, "crp | bernoulli | stick | invcdf");
  add_model_flags(sample);
  sample.o_n = sample.cmd->add_option("--n", sample.n, "sample size");
  sample.o_draws =
      sample.cmd->add_option("--draws", sample.draws, "number of draws");
  sample.o_seed = sample.cmd->add_option("--seed", sample.seed, "RNG seed");
  sample.o_trunc_tol = sample.cmd->add_option(
      "--trunc-tol", sample.trunc_tol,
      "stick route truncation tolerance in (0, 1e-3]");
  add_out_flag(sample);
  add_config_flag(sample);

  CmdOpts ver;
  ver.cmd = app.add_subcommand("verify", "Run numeric check suites");
  ver.o_suite = ver.cmd->add_option(
      "--suite", ver.suite, "lln | clt | be | coherence | mixture | moments4 | all");
  add_model_flags(ver);
  ver.o_n = ver.cmd->add_option("--n", ver.n, "sample size (lln, mixture)");
  ver.o_n_min = ver.cmd->add_option("--n-min", ver.n_min, "n grid start (clt, be)");
  ver.o_n_max = ver.cmd->add_option("--n-max", ver.n_max, "n grid end (clt, be)");
  ver.o_n_factor =
      ver.cmd->add_option("--n-factor", ver.n_factor, "n grid growth factor");
  ver.o_draws =
      ver.cmd->add_option("--draws", ver.draws, "draws (lln, mixture)");
  ver.o_seed = ver.cmd->add_option("--seed", ver.seed, "RNG seed");
  ver.o_format =
      ver.cmd->add_option("--format", ver.format, "csv | json (default json)");
  add_out_flag(ver);
  add_config_flag(ver);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (pmf.cmd->parsed()) return run_pmf(pmf.collect());
    if (constants.cmd->parsed()) return run_constants(constants.collect());
    if (sample.cmd->parsed()) return run_sample(sample.collect());
    if (ver.cmd->parsed()) return run_verify(ver.collect());
    return 2;
  } catch (const epkn::error& e) {
    std::fprintf(stderr, "epkn: %s\n", e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "epkn: %s\n", e.what());
    return 1;
  }
}
