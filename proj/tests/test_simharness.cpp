#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "szm/error.hpp"
#include "szm/simharness.hpp"
#include "szm/theory.hpp"

using namespace szm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("szm_test_" + name);
  fs::remove_all(p);
  return p;
}

ReplicationResult result(double e, double s, std::vector<std::int64_t> m) {
  return {"m1", 25, 0, e, s, std::move(m)};
}

}  // namespace

TEST(Config, Defaults) {
  const ExperimentConfig c;
  EXPECT_EQ(c.get("n"), "25,50,100,200,400");
  EXPECT_EQ(c.get("nmc"), "100");
  EXPECT_EQ(c.get("G"), "4096");
  EXPECT_EQ(c.get("model"), "m1,m2");
  EXPECT_EQ(c.get("scramble"), "false");
  EXPECT_EQ(c.get("passes"), "2");
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, SetGetRoundTrip) {
  ExperimentConfig c;
  for (const auto& key : config_keys()) {
    const std::string v = c.get(key.name);
    ExperimentConfig copy;
    copy.set(key.name, v);
    EXPECT_EQ(copy.get(key.name), v) << key.name;
  }
  c.set("delta", "0.1");
  c.set("qmc_kind", "halton");
  EXPECT_EQ(c.get("delta"), "0.1");
  EXPECT_EQ(c.get("qmc_kind"), "halton");
  EXPECT_THROW(c.set("bogus", "1"), UsageError);
  EXPECT_THROW(c.set("nmc", "ten"), UsageError);
  EXPECT_THROW(c.set("scramble", "maybe"), UsageError);
}

TEST(Config, ParseFile) {
  std::istringstream in("# experiment\nmodel = m2\nn = 25, 50\ndelta=0.1  # interior\n\n");
  const auto c = parse_config(in, "exp.cfg");
  EXPECT_EQ(c.models, std::vector<std::string>{"m2"});
  EXPECT_EQ(c.sample_sizes, (std::vector<std::size_t>{25, 50}));
  EXPECT_DOUBLE_EQ(c.delta, 0.1);
  std::istringstream bad("model = m1\nnonsense\n");
  try {
    parse_config(bad, "exp.cfg");
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("exp.cfg:2"), std::string::npos);
  }
  EXPECT_THROW(load_config("/no/such/config"), IoError);
}

TEST(Config, Validation) {
  ExperimentConfig c;
  c.delta = 1.0;
  EXPECT_THROW(c.validate(), UsageError);
  c = ExperimentConfig{};
  c.sample_sizes = {3};
  EXPECT_THROW(c.validate(), UsageError);
  c = ExperimentConfig{};
  c.models = {"m9"};
  EXPECT_THROW(c.validate(), UsageError);
  c = ExperimentConfig{};
  c.nmc = 0;
  EXPECT_THROW(c.validate(), UsageError);
}

TEST(Seeds, DistinctAcrossCells) {
  EXPECT_NE(replication_seed(1, "m1", 25, 0), replication_seed(1, "m2", 25, 0));
  EXPECT_NE(replication_seed(1, "m1", 25, 0), replication_seed(1, "m1", 50, 0));
  EXPECT_NE(replication_seed(1, "m1", 25, 0), replication_seed(1, "m1", 25, 1));
  EXPECT_EQ(replication_seed(1, "m1", 25, 3), replication_seed(1, "m1", 25, 3));
}

TEST(Quantile, TypeSeven) {
  const std::vector<double> v = {4, 1, 3, 2};
  EXPECT_DOUBLE_EQ(quantile_type7(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile_type7(v, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile_type7(v, 0.75), 3.25);
  EXPECT_DOUBLE_EQ(quantile_type7(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile_type7(v, 1.0), 4.0);
}

TEST(Summarize, ImprovementScale) {
  std::vector<ReplicationResult> r = {result(1.0558, 0.8050, {5, 6})};
  const auto s = summarize(r, 25);
  EXPECT_NEAR(s.delta_n, std::pow(25.0, 4.0 / 3.0) * 0.2508, 1e-9);
  EXPECT_NEAR(s.delta_n, 18.3356, 0.01);
}

TEST(Summarize, ScaledSmoothing) {
  std::vector<ReplicationResult> r;
  for (int k = 0; k < 100; ++k) r.push_back(result(1.0, 0.5, {k < 61 ? 6 : 5, 9}));
  const auto s = summarize(r, 25);
  EXPECT_NEAR(s.m_star_min_mean, 5.61, 1e-12);
  EXPECT_NEAR(s.m_star_min_scaled, 0.6561, 5e-5);
  EXPECT_NEAR(s.m_star_max_mean, 9.0, 1e-12);
}

TEST(Summarize, SingleReplication) {
  std::vector<ReplicationResult> r = {result(0.3, 0.2, {7, 7})};
  const auto s = summarize(r, 50);
  EXPECT_EQ(s.median_ecdf, s.mean_ecdf);
  EXPECT_EQ(s.iqr_sm, 0.0);
  EXPECT_EQ(s.variance_ecdf, 0.0);
  EXPECT_FALSE(s.variance_defined);
  EXPECT_THROW(summarize(std::vector<ReplicationResult>{}, 50), UsageError);
}

TEST(Summarize, Moments) {
  std::vector<ReplicationResult> r;
  for (double e : {1.0, 2.0, 3.0, 4.0, 10.0}) r.push_back(result(e, e / 2, {5, 5}));
  const auto s = summarize(r, 25);
  EXPECT_DOUBLE_EQ(s.mean_ecdf, 4.0);
  EXPECT_DOUBLE_EQ(s.median_ecdf, 3.0);
  EXPECT_DOUBLE_EQ(s.iqr_ecdf, 2.0);
  EXPECT_DOUBLE_EQ(s.variance_ecdf, 12.5);
  EXPECT_TRUE(s.variance_defined);
}

TEST(Replication, DeterministicAndPositive) {
  ExperimentConfig c;
  c.grid_points = 256;
  const auto a = run_replication(c, "m1", 25, 4), b = run_replication(c, "m1", 25, 4);
  EXPECT_EQ(a.ise_ecdf, b.ise_ecdf);
  EXPECT_EQ(a.ise_sm, b.ise_sm);
  EXPECT_EQ(a.m_star, b.m_star);
  EXPECT_GT(a.ise_ecdf, 0.0);
  EXPECT_GT(a.ise_sm, 0.0);
  ASSERT_EQ(a.m_star.size(), 2u);
}

TEST(Replication, CellIsThreadInvariant) {
  const auto model = make_model("m2", {{"d", 2}});
  const auto grid = qmc_grid(IntegrationRegion(0.05, 2), 256, QmcKind::sobol);
  const auto truth = cdf_on_grid(*model, grid);
  const ReplicationContext ctx{*model, grid, truth, SearchDomain{}, 2, 11};
  std::vector<std::size_t> order;
  const auto one = run_cell(ctx, 30, 6, 1, nullptr);
  const auto many = run_cell(ctx, 30, 6, 4, [&](const ReplicationResult& r) { order.push_back(r.rep); });
  ASSERT_EQ(one.size(), many.size());
  for (std::size_t k = 0; k < one.size(); ++k) {
    EXPECT_EQ(one[k].ise_sm, many[k].ise_sm);
    EXPECT_EQ(one[k].m_star, many[k].m_star);
    EXPECT_EQ(order[k], k);
  }
}

TEST(Replication, EmpiricalImseIsExact) {
  const IndependentGammaModel m1(2);
  const auto grid = qmc_grid(IntegrationRegion(0.05, 2), 4096, QmcKind::sobol);
  const auto truth = cdf_on_grid(m1, grid);
  const double sigma_integral = integrated_terms(m1, grid).sigma2;
  ReplicationContext ctx{m1, grid, truth, SearchDomain{}, 2, 20240917};
  ctx.smooth = false;
  for (std::size_t n : {25, 100}) {
    const auto r = run_cell(ctx, n, 100, 0, nullptr);
    double mean = 0, sq = 0;
    for (const auto& x : r) mean += x.ise_ecdf / r.size();
    for (const auto& x : r) sq += (x.ise_ecdf - mean) * (x.ise_ecdf - mean) / (r.size() - 1);
    EXPECT_LE(std::abs(mean - sigma_integral / n), 3.0 * std::sqrt(sq / r.size())) << n;
  }
}

TEST(Experiment, WritesLogAndTables) {
  const auto dir = scratch("experiment");
  ExperimentConfig c;
  c.models = {"m1", "m2"};
  c.sample_sizes = {25, 30};
  c.nmc = 3;
  c.grid_points = 128;
  c.out_dir = dir;
  const auto out = run_experiment(c);
  EXPECT_EQ(out.log.size(), 12u);
  EXPECT_EQ(out.summaries.size(), 4u);
  for (const char* f : {"raw_log.csv", "summary_m1.csv", "summary_m2.csv", "figure_m1.csv", "figure_m2.csv", "mstar.csv"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  std::ifstream raw(dir / "raw_log.csv");
  std::string header;
  std::getline(raw, header);
  EXPECT_EQ(header, "model,n,rep,ise_ecdf,ise_sm,m_star_1,m_star_2");
  std::ifstream fig(dir / "figure_m1.csv");
  std::getline(fig, header);
  EXPECT_EQ(header, "n,mean_ise_ecdf,mean_ise_sm");

  // Summaries recomputed from the log agree with those of the run.
  const auto again = tables_from_log(dir / "raw_log.csv", dir / "again");
  ASSERT_EQ(again.size(), out.summaries.size());
  for (std::size_t k = 0; k < again.size(); ++k) EXPECT_EQ(again[k].mean_sm, out.summaries[k].mean_sm);
  const auto log = read_raw_log(dir / "raw_log.csv");
  EXPECT_EQ(log[5].m_star, out.log[5].m_star);
  EXPECT_EQ(log[5].ise_ecdf, out.log[5].ise_ecdf);
  EXPECT_THROW(tables_from_log(dir / "missing.csv", dir), IoError);
  fs::remove_all(dir);
}

TEST(Experiment, MalformedLog) {
  const auto dir = scratch("badlog");
  fs::create_directories(dir);
  std::ofstream(dir / "raw.csv") << "model,n,rep,ise_ecdf,ise_sm,m_star_1\nm1,25,0,0.1\n";
  EXPECT_THROW(read_raw_log(dir / "raw.csv"), IoError);
  fs::remove_all(dir);
}
