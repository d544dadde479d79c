#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kGolden = JUMPLQ_GOLDEN_DIR;
const fs::path kProblems = JUMPLQ_PROBLEMS_DIR;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "jumplq");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = jumplq::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string problem(const std::string& name) { return (kProblems / (name + ".json")).string(); }

class ScratchDir {
 public:
  ScratchDir() {
    path_ = fs::temp_directory_path() /
            ("jumplq_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~ScratchDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

class ThreadsEnv {
 public:
  explicit ThreadsEnv(const char* value) { ::setenv("JUMPLQ_THREADS", value, 1); }
  ~ThreadsEnv() { ::unsetenv("JUMPLQ_THREADS"); }
};

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

void write_json(const fs::path& path, const json& doc) { std::ofstream(path) << doc.dump(); }

}  // namespace

TEST(CliGolden, SolveScalar) {
  ScratchDir dir;
  const auto r = run_cli({"solve", "--problem", problem("scalar-riccati"), "--steps", "4", "--out",
                          (dir / "solve_scalar.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, slurp(kGolden / "solve_scalar_stdout.txt"));
  for (const char* f : {"solve_scalar.csv", "solve_scalar_diagnostics.csv", "solve_scalar_gain.csv"}) {
    EXPECT_EQ(slurp(dir / f), slurp(kGolden / f)) << f;
  }
}

TEST(CliGolden, SolveJson) {
  ScratchDir dir;
  const auto r = run_cli({"solve", "--problem", problem("two-regime"), "--steps", "2", "--format",
                          "json", "--out", (dir / "k.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, slurp(kGolden / "solve_two_regime.json"));
}

TEST(CliGolden, Simulate) {
  auto r = run_cli({"simulate", "--problem", problem("zero-dynamics"), "--steps", "10", "--paths", "100"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, slurp(kGolden / "simulate_zero_dynamics.csv"));
  r = run_cli({"simulate", "--problem", problem("zero-dynamics"), "--steps", "10", "--paths", "100",
               "--format", "json"});
  EXPECT_EQ(r.out, slurp(kGolden / "simulate_zero_dynamics.json"));
  r = run_cli({"simulate", "--problem", problem("coupled-2d"), "--steps", "50", "--paths", "64",
               "--seed", "7"});
  EXPECT_EQ(r.out, slurp(kGolden / "simulate_coupled_2d.csv"));
}

TEST(CliGolden, Verify) {
  const std::vector<std::string> base{"verify",      "--problem", problem("zero-dynamics"),
                                      "--steps",     "10",        "--paths",
                                      "4",           "--gap-paths", "4",
                                      "--bias-constant", "0"};
  auto r = run_cli(base);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, slurp(kGolden / "verify_zero_dynamics.csv"));
  auto args = base;
  args.insert(args.end(), {"--format", "json"});
  r = run_cli(args);
  EXPECT_EQ(r.out, slurp(kGolden / "verify_zero_dynamics.json"));
}

TEST(CliGolden, Export) {
  const auto r = run_cli({"export", "--benchmark", "two-regime-symmetric"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, slurp(kGolden / "export_two_regime_symmetric.json"));
}

TEST(CliSchema, SolveOutputs) {
  ScratchDir dir;
  const auto r = run_cli({"solve", "--problem", problem("coupled-2d"), "--steps", "8", "--out",
                          (dir / "k.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(csv_rows(slurp(dir / "k.csv"))[0], (std::vector<std::string>{"t", "regime", "i", "j", "K_ij"}));
  EXPECT_EQ(csv_rows(slurp(dir / "k_diagnostics.csv"))[0],
            (std::vector<std::string>{"t", "regime", "min_eig_K", "min_eig_Nhat"}));
  EXPECT_EQ(csv_rows(slurp(dir / "k_gain.csv"))[0],
            (std::vector<std::string>{"t", "regime", "row", "col", "theta"}));
  EXPECT_EQ(csv_rows(slurp(dir / "k.csv")).size(), 1u + 9u * 4u);
}

TEST(CliSchema, VerifyJsonFields) {
  const auto r = run_cli({"verify", "--benchmark", "scalar-riccati", "--steps", "20", "--paths", "10",
                          "--gap-paths", "4", "--format", "json"});
  const auto doc = json::parse(r.out);
  ASSERT_EQ(doc.size(), 6u);
  for (const auto& row : doc) {
    for (const char* key : {"name", "passed", "observed", "bound", "details"}) {
      EXPECT_TRUE(row.contains(key)) << key;
    }
  }
}

TEST(CliSolve, ScalarValue) {
  ScratchDir dir;
  const auto r = run_cli({"solve", "--problem", problem("scalar-riccati"), "--out", (dir / "k.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(slurp(dir / "k.csv"));
  ASSERT_EQ(rows[1][0], "0");
  EXPECT_NEAR(std::stod(rows[1][4]), 0.5, 1e-6);
  EXPECT_NE(r.out.find("value: 0.5"), std::string::npos) << r.out;
}

TEST(CliSolve, QuasilinearizationAgrees) {
  ScratchDir dir;
  const auto a = run_cli({"solve", "--benchmark", "coupled-2d", "--format", "json", "--out",
                          (dir / "a.csv").string()});
  const auto b = run_cli({"solve", "--benchmark", "coupled-2d", "--format", "json", "--method",
                          "quasilinearization", "--out", (dir / "b.csv").string()});
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(b.code, 0) << b.err;
  const auto ja = json::parse(a.out), jb = json::parse(b.out);
  EXPECT_GT(jb["iterations"].get<int>(), 1);
  EXPECT_NEAR(ja["value"].get<double>(), jb["value"].get<double>(), 1e-7);
}

TEST(CliSolve, LyapunovOnlyGainIsZero) {
  ScratchDir dir;
  const auto r = run_cli({"solve", "--problem", problem("lyapunov-only"), "--out", (dir / "k.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(slurp(dir / "k_gain.csv"));
  ASSERT_EQ(rows.size(), 1002u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(std::stod(rows[i][4]), 0.0);
}

TEST(CliSolve, DefaultsToSolutionCsvInWorkingDirectory) {
  ScratchDir dir;
  const auto cwd = fs::current_path();
  fs::current_path(dir / "");
  const auto r = run_cli({"solve", "--benchmark", "scalar-riccati", "--steps", "10"});
  const bool written = fs::exists("solution.csv") && fs::exists("solution_gain.csv") &&
                       fs::exists("solution_diagnostics.csv");
  fs::current_path(cwd);
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(written);
}

TEST(CliSimulate, ZeroDynamicsIsExact) {
  const auto r = run_cli({"simulate", "--problem", problem("zero-dynamics"), "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = json::parse(r.out);
  EXPECT_EQ(doc["mean"].get<double>(), 5.0);
  EXPECT_EQ(doc["stderr"].get<double>(), 0.0);
  EXPECT_EQ(doc["paths"].get<int>(), 10000);
}

TEST(CliSimulate, ScalarRiccatiValue) {
  const auto r = run_cli({"simulate", "--problem", problem("scalar-riccati"), "--paths", "100000",
                          "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = json::parse(r.out);
  const double mean = doc["mean"], se = doc["stderr"];
  EXPECT_LE(std::abs(mean - 0.5), 3.0 * se + 1e-12 * 1.5);
}

TEST(CliSimulate, RepeatedSeedGivesIdenticalBytes) {
  const std::vector<std::string> args{"simulate", "--benchmark", "two-regime", "--paths", "500", "--seed", "9"};
  const auto a = run_cli(args), b = run_cli(args);
  EXPECT_EQ(a.out, b.out);
  const auto c = run_cli({"simulate", "--benchmark", "two-regime", "--paths", "500", "--seed", "10"});
  EXPECT_NE(a.out, c.out);
}

TEST(CliSimulate, ZeroControl) {
  const auto r = run_cli({"simulate", "--benchmark", "scalar-riccati", "--control", "zero", "--paths", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("scalar-riccati/zero,1,0,10,1000,42"), std::string::npos) << r.out;
}

TEST(CliDeterminism, OutputIndependentOfWorkerCount) {
  const std::vector<std::vector<std::string>> commands{
      {"simulate", "--benchmark", "coupled-2d", "--paths", "777", "--steps", "200"},
      {"verify", "--benchmark", "two-regime", "--paths", "300", "--gap-paths", "20", "--steps", "100"},
  };
  for (const auto& cmd : commands) {
    std::string ref;
    {
      ThreadsEnv env("1");
      ref = run_cli(cmd).out;
    }
    for (const char* w : {"2", "5", "16"}) {
      ThreadsEnv env(w);
      EXPECT_EQ(run_cli(cmd).out, ref) << cmd[0] << " with " << w << " workers";
    }
  }
}

TEST(CliVerify, CorpusPasses) {
  for (const char* name : {"scalar-riccati", "lyapunov-only", "two-regime-symmetric", "two-regime",
                           "coupled-2d", "zero-dynamics"}) {
    const auto r = run_cli({"verify", "--benchmark", name});
    EXPECT_EQ(r.code, 0) << name << ": " << r.err << r.out;
  }
}

TEST(CliVerify, ProblemFileWithPinnedConstant) {
  const auto r = run_cli({"verify", "--problem", problem("coupled-2d"), "--bias-constant", "5", "--paths", "2000"});
  EXPECT_EQ(r.code, 0) << r.err << r.out;
}

TEST(CliVerify, FlippedGainFailsHamilton) {
  const auto r = run_cli({"verify", "--benchmark", "two-regime", "--flip-gain-sign", "--paths", "1000"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("two-regime/hamilton_identities"), std::string::npos) << r.err;
}

TEST(CliVerify, TwoPathsStillRuns) {
  const auto r = run_cli({"verify", "--benchmark", "coupled-2d", "--paths", "2"});
  EXPECT_TRUE(r.code == 0 || r.code == 1) << r.err;
  const auto rows = csv_rows(r.out);
  EXPECT_EQ(rows.size(), 7u);
}

TEST(CliVerify, ReportToFile) {
  ScratchDir dir;
  const auto path = (dir / "report.csv").string();
  const auto r = run_cli({"verify", "--benchmark", "zero-dynamics", "--paths", "4", "--out", path});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(slurp(path).rfind("name,passed,observed,bound,details\n", 0), 0u);
}

TEST(CliErrors, MalformedFieldIsNamed) {
  ScratchDir dir;
  auto doc = json::parse(slurp(problem("scalar-riccati")));
  doc["env"]["slices"][0]["Q"] = "x";
  write_json(dir / "bad.json", doc);
  const auto r = run_cli({"solve", "--problem", (dir / "bad.json").string(), "--out", (dir / "k.csv").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("env.slices[0].Q"), std::string::npos) << r.err;
}

TEST(CliErrors, InvalidProblemIsRejected) {
  ScratchDir dir;
  auto doc = json::parse(slurp(problem("scalar-riccati")));
  doc["env"]["slices"][0]["N"] = json::array({json::array({-1.0})});
  write_json(dir / "bad.json", doc);
  const auto r = run_cli({"simulate", "--problem", (dir / "bad.json").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("N below delta floor"), std::string::npos) << r.err;
}

TEST(CliErrors, TruncatedJson) {
  ScratchDir dir;
  std::ofstream(dir / "bad.json") << "{\"n\": 1,";
  EXPECT_EQ(run_cli({"solve", "--problem", (dir / "bad.json").string()}).code, 2);
}

TEST(CliErrors, MissingFile) {
  EXPECT_EQ(run_cli({"solve", "--problem", "/nonexistent/p.json"}).code, 2);
}

TEST(CliErrors, UsageErrors) {
  EXPECT_EQ(run_cli({"solve"}).code, 2);
  EXPECT_EQ(run_cli({"verify", "--benchmark", "nope"}).code, 2);
  EXPECT_EQ(run_cli({"solve", "--benchmark", "scalar-riccati", "--bogus"}).code, 2);
  EXPECT_EQ(run_cli({"simulate", "--benchmark", "scalar-riccati", "--paths", "1"}).code, 2);
  EXPECT_EQ(run_cli({"solve", "--benchmark", "scalar-riccati", "--steps", "0"}).code, 2);
  EXPECT_EQ(run_cli({"solve", "--benchmark", "scalar-riccati", "--format", "xml"}).code, 2);
  EXPECT_EQ(run_cli({}).code, 2);
}

TEST(CliErrors, SolverErrorExitsThree) {
  ScratchDir dir;
  const auto r = run_cli({"solve", "--benchmark", "coupled-2d", "--method", "quasilinearization",
                          "--max-iter", "1", "--out", (dir / "k.csv").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("no convergence"), std::string::npos) << r.err;
}

TEST(CliErrors, OverflowExitsFour) {
  ScratchDir dir;
  auto doc = json::parse(slurp(problem("scalar-riccati")));
  doc["env"]["slices"][0]["A"] = json::array({json::array({1e300})});
  write_json(dir / "huge.json", doc);
  EXPECT_EQ(run_cli({"simulate", "--problem", (dir / "huge.json").string(), "--control", "zero",
                     "--steps", "10", "--paths", "4"}).code,
            4);
  EXPECT_EQ(run_cli({"solve", "--problem", (dir / "huge.json").string(), "--steps", "10", "--out",
                     (dir / "k.csv").string()}).code,
            4);
}
