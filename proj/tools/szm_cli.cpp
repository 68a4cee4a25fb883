// szm: command-line front end over the C interface in szm/szm.h.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "szm/szm.h"

namespace {

enum Exit { kOk = 0, kValidationFailed = 1, kUsage = 2, kIo = 3, kInternal = 4 };

// Carries a library status up to main.
struct Failure {
  szm_status status;
  std::string message;
};

void check(szm_status s) {
  if (s != SZM_OK) throw Failure{s, szm_last_error()};
}

[[noreturn]] void usage(const std::string& message) { throw Failure{SZM_ERR_USAGE, message}; }

int exit_code(szm_status s) {
  switch (s) {
    case SZM_OK: return kOk;
    case SZM_ERR_DOMAIN:
    case SZM_ERR_USAGE: return kUsage;
    case SZM_ERR_IO: return kIo;
    default: return kInternal;
  }
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using SamplePtr = std::unique_ptr<szm_sample, Deleter<szm_sample, szm_sample_free>>;
using ConfigPtr = std::unique_ptr<szm_config, Deleter<szm_config, szm_config_free>>;
using SelectionPtr = std::unique_ptr<szm_selection, Deleter<szm_selection, szm_selection_free>>;
using PointsPtr = std::unique_ptr<szm_points, Deleter<szm_points, szm_points_free>>;
using ChecksPtr = std::unique_ptr<szm_checks, Deleter<szm_checks, szm_checks_free>>;

std::string config_help() {
  std::ostringstream os;
  os << "Configuration keys (config file lines 'key = value', or --set key=value):\n";
  for (std::size_t i = 0; i < szm_config_key_count(); ++i) {
    char line[256];
    std::snprintf(line, sizeof line, "  %-14s %s\n", szm_config_key_name(i), szm_config_key_description(i));
    os << line;
  }
  os << "Environment: SZM_THREADS sets the default worker count.\n"
        "Exit codes: 0 success, 1 validation failure, 2 usage error, 3 I/O error, 4 internal error.";
  return os.str();
}

// Shared by every subcommand that reads configuration.
struct ConfigOptions {
  std::string file;
  std::vector<std::string> overrides;

  void add_to(CLI::App* app) {
    app->add_option("--config", file, "flat key = value configuration file");
    app->add_option("--set", overrides, "override one configuration key (key=value), repeatable");
  }

  ConfigPtr build() const {
    szm_config* raw = nullptr;
    check(file.empty() ? szm_config_create(&raw) : szm_config_load(file.c_str(), &raw));
    ConfigPtr cfg(raw);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) usage("--set expects key=value, got '" + kv + "'");
      set(cfg.get(), kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
  }

  static void set(szm_config* cfg, const std::string& key, const std::string& value) {
    check(szm_config_set(cfg, key.c_str(), value.c_str()));
  }
};

std::string get(const szm_config* cfg, const char* key) {
  size_t needed = 0;
  check(szm_config_get(cfg, key, nullptr, 0, &needed));
  std::string s(needed, '\0');
  check(szm_config_get(cfg, key, s.data(), s.size(), nullptr));
  s.resize(needed - 1);
  return s;
}

SamplePtr load(const std::string& path) {
  szm_sample* raw = nullptr;
  check(szm_sample_load(path.c_str(), &raw));
  return SamplePtr(raw);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_m(const int64_t* m, std::size_t d) {
  std::string s;
  for (std::size_t j = 0; j < d; ++j) s += (j ? "," : "") + std::to_string(m[j]);
  return s;
}

SelectionPtr select(const szm_sample* sample, const szm_config* cfg) {
  szm_selection* raw = nullptr;
  check(szm_select_m(sample, cfg, &raw));
  return SelectionPtr(raw);
}

std::vector<int64_t> parse_m(const std::string& text, std::size_t d) {
  std::vector<int64_t> m;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      m.push_back(v);
    } catch (const std::exception&) {
      usage("--m: expected 'auto' or a comma-separated list of integers, got '" + text + "'");
    }
  }
  if (m.size() == 1) m.assign(d, m[0]);
  if (m.size() != d) {
    usage("--m: expected 1 or " + std::to_string(d) + " values, got " + std::to_string(m.size()));
  }
  return m;
}

int run_estimate(const std::string& data, const std::string& m_text, const std::vector<double>& x,
                 const std::string& points_file, bool grid, const ConfigOptions& copt) {
  const int sources = (!x.empty()) + (!points_file.empty()) + grid;
  if (sources != 1) usage("estimate: give exactly one of --x, --points, --grid");
  const auto cfg = copt.build();
  const auto sample = load(data);
  const std::size_t d = szm_sample_dim(sample.get());

  std::vector<double> points;
  std::size_t count = 0;
  if (!x.empty()) {
    if (x.size() != d) usage("--x has " + std::to_string(x.size()) + " coordinates, data has " + std::to_string(d));
    points = x;
    count = 1;
  } else if (!points_file.empty()) {
    const auto p = load(points_file);
    if (szm_sample_dim(p.get()) != d) usage("points file dimension does not match the data");
    count = szm_sample_size(p.get());
    points.assign(szm_sample_data(p.get()), szm_sample_data(p.get()) + count * d);
  } else {
    szm_points* raw = nullptr;
    check(szm_grid_create(cfg.get(), d, &raw));
    PointsPtr g(raw);
    count = szm_points_count(g.get());
    points.assign(szm_points_data(g.get()), szm_points_data(g.get()) + count * d);
  }

  std::vector<int64_t> m;
  if (m_text == "auto") {
    const auto sel = select(sample.get(), cfg.get());
    const int64_t* ms = szm_selection_m_star(sel.get());
    m.assign(ms, ms + d);
    std::cout << "# m_star=" << join_m(m.data(), d) << '\n';
  } else {
    m = parse_m(m_text, d);
  }

  std::vector<double> ecdf(count), sm(count);
  check(szm_ecdf_many(sample.get(), points.data(), count, ecdf.data()));
  check(szm_estimate_many(sample.get(), m.data(), points.data(), count, sm.data()));
  for (std::size_t j = 1; j <= d; ++j) std::cout << "x_" << j << ',';
  std::cout << "F_ecdf,F_sm\n";
  for (std::size_t g = 0; g < count; ++g) {
    for (std::size_t j = 0; j < d; ++j) std::cout << fmt(points[g * d + j]) << ',';
    std::cout << fmt(ecdf[g]) << ',' << fmt(sm[g]) << '\n';
  }
  return kOk;
}

int run_lscv(const std::string& data, const ConfigOptions& copt) {
  const auto cfg = copt.build();
  const auto sample = load(data);
  const std::size_t d = szm_sample_dim(sample.get());
  const auto sel = select(sample.get(), cfg.get());
  std::cout << "# m_star=" << join_m(szm_selection_m_star(sel.get()), d) << '\n';
  std::cout << "# score=" << fmt(szm_selection_score(sel.get())) << '\n';
  std::cout << "pass,coordinate";
  for (std::size_t j = 1; j <= d; ++j) std::cout << ",m_" << j;
  std::cout << ",score\n";
  std::vector<int64_t> m(d);
  for (std::size_t k = 0; k < szm_selection_trace_size(sel.get()); ++k) {
    int pass = 0, coord = 0;
    double score = 0.0;
    check(szm_selection_trace_step(sel.get(), k, &pass, &coord, m.data(), &score));
    std::cout << pass << ',' << coord << ',' << join_m(m.data(), d) << ',' << fmt(score) << '\n';
  }
  return kOk;
}

void report_progress(const char* model, size_t n, size_t rep, void*) {
  std::fprintf(stderr, "%s n=%zu rep=%zu\n", model, n, rep);
}

int run_simulate(const ConfigOptions& copt, const std::vector<std::pair<std::string, std::string>>& flags,
                 bool progress) {
  const auto cfg = copt.build();
  for (const auto& [key, value] : flags) ConfigOptions::set(cfg.get(), key, value);
  check(szm_config_validate(cfg.get()));
  check(szm_simulate(cfg.get(), progress ? report_progress : nullptr, nullptr));
  std::cerr << "wrote " << get(cfg.get(), "out_dir") << "/raw_log.csv and summaries\n";
  return kOk;
}

int run_validate(const std::string& suite, uint64_t seed, unsigned threads, double reps_scale) {
  std::vector<std::string> suites;
  if (suite == "all") {
    for (const char* s : {"bias", "variance", "boundary", "clt", "skellam", "deficiency"}) suites.push_back(s);
  } else {
    bool known = false;
    for (std::size_t i = 0; i < szm_suite_count(); ++i) known = known || suite == szm_suite_name(i);
    if (!known) usage("unknown validation suite '" + suite + "'");
    suites.push_back(suite);
  }
  bool ok = true;
  std::cout << "check,predicted,observed,tolerance,pass\n";
  for (const auto& s : suites) {
    szm_checks* raw = nullptr;
    check(szm_validate(s.c_str(), seed, threads, reps_scale, &raw));
    ChecksPtr checks(raw);
    for (std::size_t i = 0; i < szm_checks_count(checks.get()); ++i) {
      const char* name = nullptr;
      double predicted = 0, observed = 0, tolerance = 0;
      int pass = 0;
      check(szm_check_get(checks.get(), i, &name, &predicted, &observed, &tolerance, &pass));
      char line[320];
      std::snprintf(line, sizeof line, "%s,%.10g,%.10g,%.6g,%s\n", name, predicted, observed,
                    tolerance, pass ? "pass" : "fail");
      std::cout << line;
    }
    ok = ok && szm_checks_all_pass(checks.get());
  }
  return ok ? kOk : kValidationFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Szasz-Mirakyan distribution function estimation, bandwidth selection and experiments"};
  app.require_subcommand(1, 1);
  app.footer(config_help());
  app.set_version_flag("--version", szm_version());

  // estimate
  auto* est = app.add_subcommand("estimate", "evaluate the empirical and smoothed CDF at points");
  std::string est_data, est_m, est_points;
  std::vector<double> est_x;
  bool est_grid = false;
  ConfigOptions est_cfg;
  est->add_option("data", est_data, "sample file (one observation per row)")->required();
  est->add_option("--m", est_m, "smoothing levels: one integer, d integers (comma list), or 'auto'")->required();
  est->add_option("--x", est_x, "single evaluation point, comma-separated")->delimiter(',');
  est->add_option("--points", est_points, "file of evaluation points");
  est->add_flag("--grid", est_grid, "evaluate on the QMC grid from the configuration");
  est_cfg.add_to(est);
  est->footer(config_help());

  // lscv
  auto* lscv = app.add_subcommand("lscv", "select the smoothing vector by least-squares cross-validation");
  std::string lscv_data;
  ConfigOptions lscv_cfg;
  lscv->add_option("data", lscv_data, "sample file")->required();
  lscv_cfg.add_to(lscv);
  lscv->footer(config_help());

  // simulate
  auto* sim = app.add_subcommand("simulate", "run the Monte Carlo experiment");
  ConfigOptions sim_cfg;
  sim_cfg.add_to(sim);
  std::optional<std::string> sim_model, sim_n, sim_out;
  std::optional<std::size_t> sim_nmc;
  std::optional<double> sim_delta;
  std::optional<uint64_t> sim_seed;
  std::optional<unsigned> sim_threads;
  bool sim_progress = false;
  sim->add_option("--model", sim_model, "models, comma-separated (m1, m2)");
  sim->add_option("--n", sim_n, "sample sizes, comma-separated");
  sim->add_option("--nmc", sim_nmc, "replications per cell");
  sim->add_option("--delta", sim_delta, "interior region parameter in (0,1)");
  sim->add_option("--seed", sim_seed, "master seed");
  sim->add_option("--out", sim_out, "output directory");
  sim->add_option("--threads", sim_threads, "worker threads (0 = SZM_THREADS or all cores)");
  sim->add_flag("--progress", sim_progress, "report each finished replication on stderr");
  sim->footer(config_help());

  // validate
  auto* val = app.add_subcommand("validate", "check theoretical predictions against computation");
  std::string val_suite = "all";
  uint64_t val_seed = 20240917;
  unsigned val_threads = 0;
  double val_scale = 1.0;
  val->add_option("--suite", val_suite,
                  "bias, variance, boundary, clt, skellam, deficiency, boundary-variance, or all")
      ->capture_default_str();
  val->add_option("--seed", val_seed, "master seed")->capture_default_str();
  val->add_option("--threads", val_threads, "worker threads (0 = SZM_THREADS or all cores)");
  val->add_option("--reps-scale", val_scale, "multiply Monte Carlo replication counts")->capture_default_str();
  val->footer(config_help());

  // tables
  auto* tab = app.add_subcommand("tables", "recompute summary tables from a raw log");
  std::string tab_log = "raw_log.csv", tab_out = ".";
  tab->add_option("--log", tab_log, "raw replication log")->capture_default_str();
  tab->add_option("--out", tab_out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*est) return run_estimate(est_data, est_m, est_x, est_points, est_grid, est_cfg);
    if (*lscv) return run_lscv(lscv_data, lscv_cfg);
    if (*sim) {
      std::vector<std::pair<std::string, std::string>> flags;
      if (sim_model) flags.emplace_back("model", *sim_model);
      if (sim_n) flags.emplace_back("n", *sim_n);
      if (sim_nmc) flags.emplace_back("nmc", std::to_string(*sim_nmc));
      if (sim_delta) flags.emplace_back("delta", fmt(*sim_delta));
      if (sim_seed) flags.emplace_back("seed", std::to_string(*sim_seed));
      if (sim_out) flags.emplace_back("out_dir", *sim_out);
      if (sim_threads) flags.emplace_back("threads", std::to_string(*sim_threads));
      return run_simulate(sim_cfg, flags, sim_progress);
    }
    if (*val) return run_validate(val_suite, val_seed, val_threads, val_scale);
    if (*tab) {
      check(szm_tables(tab_log.c_str(), tab_out.c_str()));
      return kOk;
    }
  } catch (const Failure& f) {
    std::cerr << "szm: " << f.message << '\n';
    return exit_code(f.status);
  }
  return kUsage;
}
