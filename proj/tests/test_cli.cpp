// Runs the szm executable end to end.
#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "szm/szm.h"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(SZM_CLI_PATH) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p)) out += buf;
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("szm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    szm_config* c = nullptr;
    szm_config_create(&c);
    szm_sample* s = nullptr;
    szm_sample_draw(c, "m1", 42, 40, &s);
    std::ofstream out(dir_ / "data.csv");
    out.precision(17);
    out << "x1,x2\n";
    for (size_t i = 0; i < 40; ++i) out << szm_sample_data(s)[2 * i] << ',' << szm_sample_data(s)[2 * i + 1] << '\n';
    szm_sample_free(s);
    szm_config_free(c);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) f.push_back(item);
  return f;
}

}  // namespace

TEST_F(Cli, EstimateMatchesLibrary) {
  const auto r = run("estimate " + path("data.csv") + " --m 12,20 --x 1.5,0.75");
  ASSERT_EQ(r.code, 0) << r.out;
  std::istringstream in(r.out);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "x_1,x_2,F_ecdf,F_sm");
  szm_sample* s = nullptr;
  ASSERT_EQ(szm_sample_load(path("data.csv").c_str(), &s), SZM_OK);
  const int64_t m[] = {12, 20};
  const double x[] = {1.5, 0.75};
  double f = 0;
  szm_estimate(s, m, x, &f);
  EXPECT_EQ(std::stod(split(row)[3]), f);
  szm_sample_free(s);
}

TEST_F(Cli, AutoSelectionMatchesLibrary) {
  const auto r = run("estimate " + path("data.csv") + " --m auto --x 1,1 --set G=256");
  ASSERT_EQ(r.code, 0) << r.out;
  szm_config* c = nullptr;
  szm_config_create(&c);
  szm_config_set(c, "G", "256");
  szm_sample* s = nullptr;
  szm_sample_load(path("data.csv").c_str(), &s);
  szm_selection* sel = nullptr;
  ASSERT_EQ(szm_select_m(s, c, &sel), SZM_OK);
  const auto m = szm_selection_m_star(sel);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "# m_star=" + std::to_string(m[0]) + "," + std::to_string(m[1]));
  const auto l = run("lscv " + path("data.csv") + " --set G=256");
  ASSERT_EQ(l.code, 0);
  EXPECT_EQ(l.out.substr(0, l.out.find('\n')), r.out.substr(0, r.out.find('\n')));
  EXPECT_NE(l.out.find("pass,coordinate,m_1,m_2,score"), std::string::npos);
  szm_selection_free(sel);
  szm_sample_free(s);
  szm_config_free(c);
}

TEST_F(Cli, EstimateOnGridAndPointsFile) {
  std::ofstream(path("pts.txt")) << "0.5 0.5\n2 3\n";
  const auto r = run("estimate " + path("data.csv") + " --m 9 --points " + path("pts.txt"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 3);
  const auto g = run("estimate " + path("data.csv") + " --m 9 --grid --set G=32");
  ASSERT_EQ(g.code, 0) << g.out;
  EXPECT_EQ(std::count(g.out.begin(), g.out.end(), '\n'), 33);
}

TEST_F(Cli, InputErrors) {
  const auto missing = run("estimate " + path("absent.csv") + " --m 5 --x 1,1");
  EXPECT_EQ(missing.code, 3);
  EXPECT_NE(missing.out.find(path("absent.csv")), std::string::npos);
  std::ofstream(path("bad.csv")) << "1,2\n3,x\n";
  const auto bad = run("estimate " + path("bad.csv") + " --m 5 --x 1,1");
  EXPECT_EQ(bad.code, 3);
  EXPECT_NE(bad.out.find("bad.csv:2"), std::string::npos) << bad.out;
  std::ofstream(path("neg.csv")) << "1,2\n3,-4\n";
  const auto neg = run("estimate " + path("neg.csv") + " --m 5 --x 1,1");
  EXPECT_EQ(neg.code, 2);
  EXPECT_NE(neg.out.find("neg.csv:2"), std::string::npos) << neg.out;
  EXPECT_EQ(run("estimate " + path("data.csv") + " --m 5").code, 2);
  EXPECT_EQ(run("estimate " + path("data.csv") + " --m 5,6,7 --x 1,1").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
}

TEST_F(Cli, SimulateSmokeAndDeterminism) {
  const auto a = run("simulate --model m1 --nmc 5 --n 25 --out " + path("a") + " --threads 2");
  ASSERT_EQ(a.code, 0) << a.out;
  for (const char* f : {"raw_log.csv", "summary_m1.csv", "figure_m1.csv", "mstar.csv"}) {
    EXPECT_TRUE(fs::exists(dir_ / "a" / f)) << f;
  }
  const auto b = run("simulate --model m1 --nmc 5 --n 25 --out " + path("b") + " --threads 1");
  ASSERT_EQ(b.code, 0);
  EXPECT_EQ(slurp(dir_ / "a" / "raw_log.csv"), slurp(dir_ / "b" / "raw_log.csv"));
  const auto t = run("tables --log " + path("a/raw_log.csv") + " --out " + path("t"));
  EXPECT_EQ(t.code, 0);
  EXPECT_EQ(slurp(dir_ / "a" / "summary_m1.csv"), slurp(dir_ / "t" / "summary_m1.csv"));
}

TEST_F(Cli, SimulateConfigFile) {
  std::ofstream(path("exp.cfg")) << "model = m2\nn = 25\nnmc = 2\nG = 64\nout_dir = " << path("c") << "\n";
  const auto r = run("simulate --config " + path("exp.cfg"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(dir_ / "c" / "summary_m2.csv"));
}

TEST_F(Cli, SimulateRejectsBadDeltaUpFront) {
  const auto r = run("simulate --delta 1.5 --out " + path("never"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("delta"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "never"));
  EXPECT_EQ(run("simulate --set nmc=0 --out " + path("never")).code, 2);
}

TEST_F(Cli, Validate) {
  const auto r = run("validate --suite skellam");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 4);
  EXPECT_NE(r.out.find("skellam:lambda=400"), std::string::npos);
  EXPECT_EQ(run("validate --suite nope").code, 2);
  // The boundary-variance suite has a failing row: exit 1.
  EXPECT_EQ(run("validate --suite boundary-variance --reps-scale 0.02").code, 1);
}

TEST_F(Cli, HelpListsEveryKey) {
  for (const char* sub : {"simulate", "lscv", "estimate", "validate"}) {
    const auto r = run(std::string(sub) + " --help");
    EXPECT_EQ(r.code, 0);
    for (size_t i = 0; i < szm_config_key_count(); ++i) {
      EXPECT_NE(r.out.find(std::string("  ") + szm_config_key_name(i) + " "), std::string::npos)
          << sub << " " << szm_config_key_name(i);
    }
  }
}
