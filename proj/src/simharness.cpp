#include "szm/simharness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "szm/error.hpp"
#include "szm/rng.hpp"

namespace szm {
namespace {

constexpr ConfigKey kKeys[] = {
    {"model", "comma-separated model names: m1 (independent Gamma), m2 (Clayton-Gamma) [m1,m2]"},
    {"d", "dimension [2]"},
    {"alpha", "Gamma marginal shape [2]"},
    {"beta", "Gamma marginal rate [1]"},
    {"theta", "Clayton parameter for m2 [2]"},
    {"n", "comma-separated sample sizes [25,50,100,200,400]"},
    {"nmc", "Monte Carlo replications per (model, n) cell [100]"},
    {"delta", "interior region S_delta = [delta, 1/delta)^d, delta in (0,1) [0.05]"},
    {"G", "number of QMC grid points [4096]"},
    {"qmc_kind", "sobol or halton [sobol]"},
    {"scramble", "randomize the QMC point set: true/false [false]"},
    {"scramble_seed", "seed of the QMC randomization [0]"},
    {"m_min", "smallest candidate smoothing level [5]"},
    {"m_cap", "absolute cap on candidate smoothing levels [500]"},
    {"c", "m_max(n) = min(floor(c n^{2/3}), m_cap, n) [3]"},
    {"passes", "coordinate-descent passes after the isotropic pilot [2]"},
    {"seed", "master seed [20240917]"},
    {"out_dir", "directory for raw_log.csv and the summary files [.]"},
    {"threads", "worker threads, 0 = SZM_THREADS or hardware concurrency [0]"},
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const std::string t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw UsageError("config key '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const auto t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw UsageError("config key '" + key + "': expected true or false, got '" + text + "'");
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::span<const ConfigKey> config_keys() { return kKeys; }

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "model" || key == "models") {
    models = split_list(value);
  } else if (key == "d") {
    d = parse_number<std::size_t>(key, value);
  } else if (key == "alpha") {
    alpha = parse_number<double>(key, value);
  } else if (key == "beta") {
    beta = parse_number<double>(key, value);
  } else if (key == "theta") {
    theta = parse_number<double>(key, value);
  } else if (key == "n") {
    sample_sizes.clear();
    for (const auto& item : split_list(value)) sample_sizes.push_back(parse_number<std::size_t>(key, item));
  } else if (key == "nmc") {
    nmc = parse_number<std::size_t>(key, value);
  } else if (key == "delta") {
    delta = parse_number<double>(key, value);
  } else if (key == "G") {
    grid_points = parse_number<std::size_t>(key, value);
  } else if (key == "qmc_kind") {
    qmc_kind = parse_qmc_kind(trim(value));
  } else if (key == "scramble") {
    scramble = parse_bool(key, value);
  } else if (key == "scramble_seed") {
    scramble_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "m_min") {
    domain.m_min = parse_number<std::int64_t>(key, value);
  } else if (key == "m_cap") {
    domain.m_cap = parse_number<std::int64_t>(key, value);
  } else if (key == "c") {
    domain.c = parse_number<double>(key, value);
  } else if (key == "passes") {
    passes = parse_number<int>(key, value);
  } else if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "out_dir") {
    out_dir = trim(value);
  } else if (key == "threads") {
    threads = parse_number<unsigned>(key, value);
  } else {
    throw UsageError("unknown config key '" + key + "'");
  }
}

std::string ExperimentConfig::get(const std::string& key) const {
  if (key == "model" || key == "models") return join(models);
  if (key == "d") return std::to_string(d);
  if (key == "alpha") return fmt_short(alpha);
  if (key == "beta") return fmt_short(beta);
  if (key == "theta") return fmt_short(theta);
  if (key == "n") return join(sample_sizes);
  if (key == "nmc") return std::to_string(nmc);
  if (key == "delta") return fmt_short(delta);
  if (key == "G") return std::to_string(grid_points);
  if (key == "qmc_kind") return to_string(qmc_kind);
  if (key == "scramble") return scramble ? "true" : "false";
  if (key == "scramble_seed") return std::to_string(scramble_seed);
  if (key == "m_min") return std::to_string(domain.m_min);
  if (key == "m_cap") return std::to_string(domain.m_cap);
  if (key == "c") return fmt_short(domain.c);
  if (key == "passes") return std::to_string(passes);
  if (key == "seed") return std::to_string(seed);
  if (key == "out_dir") return out_dir.string();
  if (key == "threads") return std::to_string(threads);
  throw UsageError("unknown config key '" + key + "'");
}

void ExperimentConfig::validate() const {
  if (models.empty()) throw UsageError("config: at least one model is required");
  for (const auto& m : models) make_model(m, model_params());
  if (d == 0) throw UsageError("config: d must be positive");
  if (sample_sizes.empty()) throw UsageError("config: at least one sample size is required");
  if (nmc == 0) throw UsageError("config: nmc must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw UsageError("config: delta must lie in (0, 1)");
  if (grid_points == 0) throw UsageError("config: G must be positive");
  if (passes < 0) throw UsageError("config: passes must be nonnegative");
  for (const auto n : sample_sizes) {
    if (n < 2) throw UsageError("config: sample sizes must be at least 2");
    if (domain.m_max(n) < domain.m_min) {
      throw UsageError("config: empty search range for n = " + std::to_string(n) + " (m_max = " +
                       std::to_string(domain.m_max(n)) + " < m_min = " +
                       std::to_string(domain.m_min) + ")");
    }
  }
}

ModelParams ExperimentConfig::model_params() const {
  return {{"d", static_cast<double>(d)}, {"alpha", alpha}, {"beta", beta}, {"theta", theta}};
}

EvaluationGrid ExperimentConfig::make_grid() const {
  return qmc_grid(IntegrationRegion(delta, d), grid_points, qmc_kind,
                  scramble ? std::optional<std::uint64_t>(scramble_seed) : std::nullopt);
}

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw UsageError(source + ":" + std::to_string(line_no) + ": expected key = value");
    }
    try {
      cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    } catch (const UsageError& e) {
      throw UsageError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  return parse_config(in, path.string());
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SZM_THREADS")) {
    unsigned v = 0;
    const std::string s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size() && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::uint64_t replication_seed(std::uint64_t master, const std::string& model, std::size_t n,
                               std::size_t r) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a of the model name
  for (const unsigned char ch : model) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return mix_seed({master, h, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(r)});
}

ReplicationResult run_replication(const ReplicationContext& ctx, std::size_t n, std::size_t r) {
  const auto sample = ctx.model.sample(replication_seed(ctx.master_seed, ctx.model.name(), n, r), n);
  LscvEvaluator evaluator(sample, ctx.grid);
  ReplicationResult out;
  out.model = ctx.model.name();
  out.n = n;
  out.rep = r;
  out.ise_ecdf = ise(evaluator.empirical_on_grid(), ctx.truth, ctx.grid);
  if (ctx.smooth) {
    const auto sel = select_m(evaluator, n, sample.dim(), ctx.domain, ctx.passes);
    out.ise_sm = ise(evaluator.estimate_on_grid(sel.m_star), ctx.truth, ctx.grid);
    out.m_star.assign(sel.m_star.values().begin(), sel.m_star.values().end());
  } else {
    out.ise_sm = std::nan("");
  }
  return out;
}

ReplicationResult run_replication(const ExperimentConfig& config, const std::string& model,
                                  std::size_t n, std::size_t r) {
  config.validate();
  const auto m = make_model(model, config.model_params());
  const auto grid = config.make_grid();
  const auto truth = cdf_on_grid(*m, grid);
  const ReplicationContext ctx{*m, grid, truth, config.domain, config.passes, config.seed};
  return run_replication(ctx, n, r);
}

std::vector<ReplicationResult> run_cell(const ReplicationContext& ctx, std::size_t n,
                                        std::size_t count, unsigned threads,
                                        const std::function<void(const ReplicationResult&)>& on_result) {
  std::vector<std::optional<ReplicationResult>> slots(count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex mu;
  std::size_t emitted = 0;

  const auto worker = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t r = next.fetch_add(1);
      if (r >= count) return;
      try {
        auto result = run_replication(ctx, n, r);
        std::lock_guard lock(mu);
        slots[r] = std::move(result);
        while (emitted < count && slots[emitted]) {
          if (on_result) on_result(*slots[emitted]);
          ++emitted;
        }
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  const unsigned workers =
      std::max(1u, std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>(count)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  std::vector<ReplicationResult> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

double quantile_type7(std::vector<double> values, double p) {
  if (values.empty()) throw UsageError("quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

IseSummary summarize(std::span<const ReplicationResult> results, std::size_t n) {
  if (results.empty()) throw UsageError("summarize: no replications");
  IseSummary s;
  s.model = results.front().model;
  s.n = n;
  s.count = results.size();
  std::vector<double> e, m;
  double min_sum = 0.0, max_sum = 0.0;
  for (const auto& r : results) {
    e.push_back(r.ise_ecdf);
    m.push_back(r.ise_sm);
    if (!r.m_star.empty()) {
      min_sum += static_cast<double>(*std::min_element(r.m_star.begin(), r.m_star.end()));
      max_sum += static_cast<double>(*std::max_element(r.m_star.begin(), r.m_star.end()));
    }
  }
  const auto moments = [](const std::vector<double>& v, double& mean, double& var) {
    mean = pairwise_sum(v) / static_cast<double>(v.size());
    if (v.size() < 2) {
      var = 0.0;
      return;
    }
    std::vector<double> dev(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) dev[i] = (v[i] - mean) * (v[i] - mean);
    var = pairwise_sum(dev) / static_cast<double>(v.size() - 1);
  };
  moments(e, s.mean_ecdf, s.variance_ecdf);
  moments(m, s.mean_sm, s.variance_sm);
  s.variance_defined = results.size() >= 2;
  s.median_ecdf = quantile_type7(e, 0.5);
  s.median_sm = quantile_type7(m, 0.5);
  s.iqr_ecdf = quantile_type7(e, 0.75) - quantile_type7(e, 0.25);
  s.iqr_sm = quantile_type7(m, 0.75) - quantile_type7(m, 0.25);
  const double nn = static_cast<double>(n);
  s.delta_n = std::pow(nn, 4.0 / 3.0) * (s.mean_ecdf - s.mean_sm);
  const double count = static_cast<double>(results.size());
  s.m_star_min_mean = min_sum / count;
  s.m_star_max_mean = max_sum / count;
  const double scale = std::pow(nn, 2.0 / 3.0);
  s.m_star_min_scaled = s.m_star_min_mean / scale;
  s.m_star_max_scaled = s.m_star_max_mean / scale;
  return s;
}

std::string raw_log_header(std::size_t d) {
  std::string h = "model,n,rep,ise_ecdf,ise_sm";
  for (std::size_t j = 1; j <= d; ++j) h += ",m_star_" + std::to_string(j);
  return h;
}

std::string raw_log_row(const ReplicationResult& r) {
  std::string row = r.model + "," + std::to_string(r.n) + "," + std::to_string(r.rep) + "," +
                    fmt(r.ise_ecdf) + "," + fmt(r.ise_sm);
  for (const auto m : r.m_star) row += "," + std::to_string(m);
  return row;
}

std::vector<ReplicationResult> read_raw_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open raw log: " + path.string());
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("model,n,rep,ise_ecdf,ise_sm")) {
    throw IoError(path.string() + ":1: missing raw log header");
  }
  std::vector<ReplicationResult> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(trim(item));
    try {
      if (f.size() < 5) throw UsageError("too few columns");
      ReplicationResult r;
      r.model = f[0];
      r.n = parse_number<std::size_t>("n", f[1]);
      r.rep = parse_number<std::size_t>("rep", f[2]);
      r.ise_ecdf = std::stod(f[3]);
      r.ise_sm = std::stod(f[4]);
      for (std::size_t k = 5; k < f.size(); ++k) r.m_star.push_back(parse_number<std::int64_t>("m_star", f[k]));
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": malformed row (" + e.what() + ")");
    }
  }
  return out;
}

std::vector<IseSummary> summarize_log(std::span<const ReplicationResult> log) {
  std::vector<std::pair<std::string, std::size_t>> order;
  std::map<std::pair<std::string, std::size_t>, std::vector<ReplicationResult>> cells;
  for (const auto& r : log) {
    const auto key = std::make_pair(r.model, r.n);
    if (!cells.contains(key)) order.push_back(key);
    cells[key].push_back(r);
  }
  std::vector<IseSummary> out;
  for (const auto& key : order) out.push_back(summarize(cells[key], key.second));
  return out;
}

void write_tables(std::span<const IseSummary> summaries, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());
  std::map<std::string, std::vector<const IseSummary*>> by_model;
  std::vector<std::string> model_order;
  for (const auto& s : summaries) {
    if (!by_model.contains(s.model)) model_order.push_back(s.model);
    by_model[s.model].push_back(&s);
  }
  const auto open = [&](const std::string& name) {
    std::ofstream f(out_dir / name);
    if (!f) throw IoError("cannot write " + (out_dir / name).string());
    return f;
  };
  for (const auto& model : model_order) {
    auto table = open("summary_" + model + ".csv");
    table << "n,median_ise_ecdf,median_ise_sm,iqr_ise_ecdf,iqr_ise_sm,mean_ise_ecdf,mean_ise_sm,"
             "variance_ise_ecdf,variance_ise_sm,delta_n,replications,variance_defined\n";
    auto fig = open("figure_" + model + ".csv");
    fig << "n,mean_ise_ecdf,mean_ise_sm\n";
    for (const auto* s : by_model[model]) {
      table << s->n << ',' << fmt_short(s->median_ecdf) << ',' << fmt_short(s->median_sm) << ','
            << fmt_short(s->iqr_ecdf) << ',' << fmt_short(s->iqr_sm) << ','
            << fmt_short(s->mean_ecdf) << ',' << fmt_short(s->mean_sm) << ','
            << fmt_short(s->variance_ecdf) << ',' << fmt_short(s->variance_sm) << ','
            << fmt_short(s->delta_n) << ',' << s->count << ','
            << (s->variance_defined ? "true" : "false") << '\n';
      fig << s->n << ',' << fmt_short(s->mean_ecdf) << ',' << fmt_short(s->mean_sm) << '\n';
    }
    if (!table || !fig) throw IoError("write failed in " + out_dir.string());
  }
  auto mstar = open("mstar.csv");
  mstar << "model,n,mean_m_star_min,mean_m_star_max,mean_m_star_min_scaled,mean_m_star_max_scaled\n";
  for (const auto& s : summaries) {
    mstar << s.model << ',' << s.n << ',' << fmt_short(s.m_star_min_mean) << ','
          << fmt_short(s.m_star_max_mean) << ',' << fmt_short(s.m_star_min_scaled) << ','
          << fmt_short(s.m_star_max_scaled) << '\n';
  }
  if (!mstar) throw IoError("write failed in " + out_dir.string());
}

std::vector<IseSummary> tables_from_log(const std::filesystem::path& raw_log,
                                        const std::filesystem::path& out_dir) {
  const auto log = read_raw_log(raw_log);
  if (log.empty()) throw IoError(raw_log.string() + ": raw log has no rows");
  auto summaries = summarize_log(log);
  write_tables(summaries, out_dir);
  return summaries;
}

ExperimentOutput run_experiment(const ExperimentConfig& config,
                                const std::function<void(const ReplicationResult&)>& on_result) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + config.out_dir.string() + ": " + ec.message());
  const auto raw_path = config.out_dir / "raw_log.csv";
  std::ofstream raw(raw_path, std::ios::trunc);
  if (!raw) throw IoError("cannot write " + raw_path.string());
  raw << raw_log_header(config.d) << '\n' << std::flush;

  const auto grid = config.make_grid();
  const unsigned threads = resolve_threads(config.threads);
  for (const auto& name : config.models) {
    const auto model = make_model(name, config.model_params());
    const auto truth = cdf_on_grid(*model, grid);
    const ReplicationContext ctx{*model, grid, truth, config.domain, config.passes, config.seed};
    for (const auto n : config.sample_sizes) {
      run_cell(ctx, n, config.nmc, threads, [&](const ReplicationResult& r) {
        raw << raw_log_row(r) << '\n' << std::flush;
        if (!raw) throw IoError("write failed: " + raw_path.string());
        if (on_result) on_result(r);
      });
    }
  }
  raw.close();

  ExperimentOutput out;
  out.raw_log_path = raw_path;
  out.log = read_raw_log(raw_path);
  out.summaries = summarize_log(out.log);
  write_tables(out.summaries, config.out_dir);
  return out;
}

}  // namespace szm
