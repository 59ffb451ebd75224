#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>

#include "test_fixtures.hpp"
#include "trp/fixtures.hpp"
#include "trp/io.hpp"

using namespace trp;
namespace fs = std::filesystem;

namespace {

template <typename F>
std::optional<ErrorKind> kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("trp_io_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void put(const std::string& name, const std::string& text) const { io::write_file(path(name), text); }

  int run(const std::string& args) const {
    const std::string cmd = std::string(TRP_CLI_PATH) + " " + args + " 2>" + path("stderr.txt");
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  }

  fs::path dir_;
};

}  // namespace

TEST(Config, DefaultsAndOverrides) {
  const io::RunConfig c = io::parse_config(R"({"seed": 9, "lambda": [2, 0, -2], "tol_ode": 1e-9, "n_samples": 3})");
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.lambda[0], 2.0);
  EXPECT_EQ(c.mu[0], 1.0);
  EXPECT_EQ(c.tol_ode, 1e-9);
  EXPECT_EQ(c.tol_return, 1e-8);
  EXPECT_EQ(c.n_samples, 3);
  EXPECT_EQ(io::parse_config("{}").n_samples, 200);
}

TEST(Config, RejectsBadInput) {
  for (const char* bad : {"[1]", "{", R"({"lamda": [1, 0, -1]})", R"({"lambda": [1, 0, -0.5]})",
                          R"({"lambda": [0, 1, -1]})", R"({"tol_ode": -1})", R"({"tol_ode": "x"})",
                          R"({"n_samples": 2.5})", R"({"n_samples": -1})", R"({"seed": -3})"})
    EXPECT_EQ(kind_of([&] { (void)io::parse_config(bad); }), ErrorKind::InputError) << bad;
}

TEST(PointJson, RoundTripIsExact) {
  const ReducedPoint p = oracle::fixture_point(oracle::kMixed);
  const ReducedPoint q = io::parse_point(io::point_json(p));
  EXPECT_EQ(p, q);
}

TEST(PointJson, ValidationRejectsNonAntiHermitian) {
  ReducedPoint p = oracle::fixture_point(oracle::kSeed3);
  Complex3x3 y = p.Y.mat();
  y(0, 1) += 0.1;
  p.Y = AntiHermitian3::unchecked(y);
  const std::string text = io::point_json(p);
  EXPECT_EQ(kind_of([&] { (void)io::parse_point(text); }), ErrorKind::InputError);
  EXPECT_EQ(io::parse_point(text, false).Y.mat()(0, 1), y(0, 1));
  EXPECT_EQ(kind_of([&] { (void)io::parse_point(R"({"lambda": [1, 0, -1]})"); }), ErrorKind::InputError);
}

TEST(Csv, StrictReader) {
  const std::vector<std::string> cols{"a", "b"};
  const auto rows = io::read_csv_strict("a,b\n1,2.5\n-3,nan\n", cols);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0][1], 2.5);
  EXPECT_TRUE(std::isnan(rows[1][1]));
  for (const char* bad : {"a,c\n1,2\n", "a,b\n1\n", "a,b\n1,2,3\n", "a,b\n1,x\n", "a,b\n1,2"})
    EXPECT_EQ(kind_of([&] { (void)io::read_csv_strict(bad, cols); }), ErrorKind::InputError) << bad;
}

TEST(Csv, ProfileRoundTrip) {
  ActionProfile prof;
  prof.rows = {{3, -0.25, 2.5, 0.0, 1e-14}, {0, 0.125, 2.25, 0.9, 0.0}};
  const auto rows = io::read_csv_strict(io::profile_csv(prof), io::profile_columns());
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0][0], 3.0);
  EXPECT_EQ(rows[1][2], 2.25);
  EXPECT_EQ(rows[1][3], 0.9);
}

TEST(Format, NonFinite) {
  EXPECT_EQ(io::fmt(std::nan("")), "nan");
  EXPECT_EQ(io::fmt_json(std::numeric_limits<double>::infinity()), "null");
  EXPECT_EQ(io::fmt(0.1), "0.10000000000000001");
}

TEST_F(Cli, SampleIsDeterministic) {
  ASSERT_EQ(run("sample --seed 4 -o " + path("a.json")), 0);
  ASSERT_EQ(run("sample --seed 4 -o " + path("b.json")), 0);
  ASSERT_EQ(run("sample --seed 5 -o " + path("c.json")), 0);
  EXPECT_EQ(io::read_file(path("a.json")), io::read_file(path("b.json")));
  EXPECT_NE(io::read_file(path("a.json")), io::read_file(path("c.json")));
  const ReducedPoint p = io::parse_point(io::read_file(path("a.json")));
  EXPECT_LE(p.moment_residual, 1e-10);
  EXPECT_EQ(p.seed, 4u);
}

TEST_F(Cli, FlowWritesOnePeriod) {
  put("p.json", io::point_json(oracle::fixture_point(oracle::kSeed3)));
  ASSERT_EQ(run("flow -i " + path("p.json") + " -o " + path("t.csv")), 0);
  const auto rows = io::read_csv_strict(io::read_file(path("t.csv")), io::trajectory_columns());
  ASSERT_GT(rows.size(), 10u);
  EXPECT_NEAR(rows.back()[0], oracle::kSeed3.T, 1e-6);
  EXPECT_NEAR(rows.front()[2], oracle::kSeed3.z0.real(), 1e-10);
  EXPECT_NEAR(rows.back()[3], rows.front()[3], 1e-6);
}

TEST_F(Cli, LooseOdeToleranceFailsDriftInvariants) {
  put("c.json", R"({"tol_ode": 1e-3})");
  EXPECT_EQ(run("check -c " + path("c.json") + " -o " + path("r.json")), 4);
  const auto rep = nlohmann::json::parse(io::read_file(path("r.json")));
  EXPECT_FALSE(rep["invariants"]["flow.casimir_drift"]["pass"].get<bool>());
  EXPECT_FALSE(rep["invariants"]["flow.spectrum_drift"]["pass"].get<bool>());
}

TEST_F(Cli, DivisorReport) {
  put("p.json", io::point_json(oracle::fixture_point(oracle::kSeed8)));
  ASSERT_EQ(run("divisor -i " + path("p.json") + " -o " + path("d.json")), 0);
  const auto j = nlohmann::json::parse(io::read_file(path("d.json")));
  EXPECT_NEAR(j["z0"][1].get<double>(), oracle::kSeed8.z0.imag(), 1e-12);
  EXPECT_NEAR(j["eta0"][0].get<double>(), oracle::kSeed8.eta0.real(), 1e-12);
  EXPECT_EQ(j["column_used"].get<int>(), 1);
}

TEST_F(Cli, ProfileWritesCsvAndSidecar) {
  put("c.json", R"({"n_samples": 6, "seed": 2})");
  ASSERT_EQ(run("profile -c " + path("c.json") + " -o " + path("p.csv")), 0);
  const auto rows = io::read_csv_strict(io::read_file(path("p.csv")), io::profile_columns());
  const auto side = nlohmann::json::parse(io::read_file(path("p.csv.json")));
  EXPECT_EQ(static_cast<int>(rows.size()) + side["n_failed"].get<int>(), 6);
  EXPECT_NEAR(side["H_bound"].get<double>(), 2.0, 1e-9);
  EXPECT_EQ(side["kappa"][1].get<double>(), -1.0);
  ASSERT_EQ(run("profile -c " + path("c.json") + " -o " + path("q.csv")), 0);
  EXPECT_EQ(io::read_file(path("p.csv")), io::read_file(path("q.csv")));
  EXPECT_EQ(run("profile -c " + path("c.json")), 1);
}

TEST_F(Cli, ExitCodes) {
  put("bad.json", R"({"bogus": 1})");
  EXPECT_EQ(run("sample -c " + path("bad.json")), 1);
  EXPECT_EQ(run("sample -c " + path("missing.json")), 1);
  EXPECT_EQ(run("nonsense"), 1);
  put("far.json", R"({"lambda": [10, 0, -10]})");
  EXPECT_EQ(run("sample -c " + path("far.json")), 2);
  put("b.json", io::point_json(boundary_point(0.7, 1)));
  EXPECT_EQ(run("flow -i " + path("b.json")), 3);
}

TEST_F(Cli, CheckPassesAndCatchesCorruptedPoint) {
  ASSERT_EQ(run("check -o " + path("r.json")), 0);
  const auto rep = nlohmann::json::parse(io::read_file(path("r.json")));
  EXPECT_TRUE(rep["pass"].get<bool>());
  ReducedPoint p = oracle::fixture_point(oracle::kSeed3);
  Complex3x3 y = p.Y.mat();
  y(0, 2) += cplx(0.05, 0.0);
  p.Y = AntiHermitian3::unchecked(y);
  put("p.json", io::point_json(p));
  EXPECT_EQ(run("check -i " + path("p.json") + " -o " + path("r2.json")), 4);
  const auto rep2 = nlohmann::json::parse(io::read_file(path("r2.json")));
  EXPECT_FALSE(rep2["pass"].get<bool>());
}
