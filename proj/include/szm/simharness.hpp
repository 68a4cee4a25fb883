#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "szm/estimators.hpp"
#include "szm/lscv.hpp"
#include "szm/models.hpp"
#include "szm/qmc.hpp"

namespace szm {

// Flat key = value experiment configuration. Every field is a key; see
// config_keys() for names, defaults and meaning.
struct ExperimentConfig {
  std::vector<std::string> models{"m1", "m2"};
  std::size_t d = 2;
  double alpha = 2.0;
  double beta = 1.0;
  double theta = 2.0;
  std::vector<std::size_t> sample_sizes{25, 50, 100, 200, 400};
  std::size_t nmc = 100;
  double delta = 0.05;
  std::size_t grid_points = 4096;
  QmcKind qmc_kind = QmcKind::sobol;
  bool scramble = false;
  std::uint64_t scramble_seed = 0;
  SearchDomain domain{};
  int passes = 2;
  std::uint64_t seed = 20240917;
  std::filesystem::path out_dir = ".";
  unsigned threads = 0;  // 0: SZM_THREADS or hardware concurrency

  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  // Throws UsageError on inconsistent values.
  void validate() const;

  ModelParams model_params() const;
  EvaluationGrid make_grid() const;
};

struct ConfigKey {
  const char* name;
  const char* description;
};
std::span<const ConfigKey> config_keys();

ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(std::istream& in, const std::string& source);

unsigned resolve_threads(unsigned requested);

std::uint64_t replication_seed(std::uint64_t master, const std::string& model, std::size_t n,
                               std::size_t r);

struct ReplicationResult {
  std::string model;
  std::size_t n = 0;
  std::size_t rep = 0;
  double ise_ecdf = 0.0;
  double ise_sm = 0.0;
  std::vector<std::int64_t> m_star;
};

// Shared, read-only state for all replications of one model.
struct ReplicationContext {
  const DistributionModel& model;
  const EvaluationGrid& grid;
  std::span<const double> truth;  // model cdf on the grid
  SearchDomain domain;
  int passes;
  std::uint64_t master_seed;
  bool smooth = true;  // false: skip LSCV and the smoothed estimator
};

ReplicationResult run_replication(const ReplicationContext& ctx, std::size_t n, std::size_t r);
ReplicationResult run_replication(const ExperimentConfig& config, const std::string& model,
                                  std::size_t n, std::size_t r);

// Runs replications 0..count-1 of one cell on `threads` workers (0 = auto). Results come
// back in replication order; `on_result` is called in replication order from a
// single thread at a time.
std::vector<ReplicationResult> run_cell(const ReplicationContext& ctx, std::size_t n,
                                        std::size_t count, unsigned threads,
                                        const std::function<void(const ReplicationResult&)>& on_result = {});

struct IseSummary {
  std::string model;
  std::size_t n = 0;
  std::size_t count = 0;
  double median_ecdf = 0.0, median_sm = 0.0;
  double iqr_ecdf = 0.0, iqr_sm = 0.0;
  double mean_ecdf = 0.0, mean_sm = 0.0;
  double variance_ecdf = 0.0, variance_sm = 0.0;
  bool variance_defined = false;  // false for a single replication; variances reported as 0
  double delta_n = 0.0;           // n^{4/3} (mean_ecdf - mean_sm)
  double m_star_min_mean = 0.0, m_star_max_mean = 0.0;
  double m_star_min_scaled = 0.0, m_star_max_scaled = 0.0;  // means of m / n^{2/3}
};

// Linear-interpolation (type 7) quantile of an unsorted sample.
double quantile_type7(std::vector<double> values, double p);

IseSummary summarize(std::span<const ReplicationResult> results, std::size_t n);

// Raw log: CSV `model,n,rep,ise_ecdf,ise_sm,m_star_1,...,m_star_d`.
std::string raw_log_header(std::size_t d);
std::string raw_log_row(const ReplicationResult& r);
std::vector<ReplicationResult> read_raw_log(const std::filesystem::path& path);

// Summaries per (model, n) in first-appearance order.
std::vector<IseSummary> summarize_log(std::span<const ReplicationResult> log);

// Writes summary_<model>.csv, figure_<model>.csv and mstar.csv into out_dir.
void write_tables(std::span<const IseSummary> summaries, const std::filesystem::path& out_dir);
std::vector<IseSummary> tables_from_log(const std::filesystem::path& raw_log,
                                        const std::filesystem::path& out_dir);

struct ExperimentOutput {
  std::vector<IseSummary> summaries;
  std::vector<ReplicationResult> log;
  std::filesystem::path raw_log_path;
};

// Appends every replication to out_dir/raw_log.csv as it completes (in
// replication order), then recomputes summaries from the log file.
ExperimentOutput run_experiment(const ExperimentConfig& config,
                                const std::function<void(const ReplicationResult&)>& on_result = {});

}  // namespace szm
