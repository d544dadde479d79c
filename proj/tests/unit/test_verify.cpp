#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "jumplq/benchmarks.hpp"
#include "jumplq/verify.hpp"
#include "support.hpp"

using namespace jumplq;
using namespace jumplq::testing;

namespace {

FeedbackLaw optimal_law(const LqProblem& p, const RiccatiSolution& sol) { return gain_from_riccati(p, sol); }

FeedbackLaw flipped(FeedbackLaw law) {
  for (auto& node : law.gain) {
    for (auto& g : node) g = -g;
  }
  return law;
}

LqProblem zero_problem() {
  return deterministic(zero_slice(2, 1, 1, 1), marks_with({0.5}), SymMat::zero(2), Vector::Ones(2));
}

}  // namespace

TEST(ValueMatch, ScalarRiccati) {
  const LqProblem p = canned_problem("scalar-riccati");
  const auto r = check_value_match(p, TimeGrid(1000, p.T), 100000, 42, pinned_bias_constant("scalar-riccati"));
  EXPECT_TRUE(r.passed) << r.details;
}

TEST(ValueMatch, LyapunovOnlyUsesZeroGain) {
  const LqProblem p = canned_problem("lyapunov-only");
  const auto r = check_value_match(p, TimeGrid(1000, p.T), 10000, 42, pinned_bias_constant("lyapunov-only"));
  EXPECT_TRUE(r.passed) << r.details;
}

TEST(ValueMatch, TwoRegime) {
  const LqProblem p = canned_problem("two-regime");
  const auto r = check_value_match(p, TimeGrid(1000, p.T), 10000, 42, pinned_bias_constant("two-regime"));
  EXPECT_TRUE(r.passed) << r.details;
  EXPECT_EQ(r.disc_allowance, 2.5 * 1e-3);
}

TEST(OptimalityGap, ZeroDirectionHasZeroGap) {
  const LqProblem p = canned_problem("coupled-2d");
  const TimeGrid grid(200, p.T);
  const std::vector<std::vector<Vector>> dirs{std::vector<Vector>(grid.steps, Vector::Zero(1))};
  const std::vector<double> eps{0.1, 0.05};
  const auto r = check_optimality_gap(p, grid, 100, 1, dirs, eps);
  EXPECT_TRUE(r.passed) << r.details;
  EXPECT_EQ(r.observed[0], 0.0);
}

TEST(OptimalityGap, ScalarRiccatiTenDirections) {
  const LqProblem p = canned_problem("scalar-riccati");
  const TimeGrid grid(1000, p.T);
  const auto dirs = random_directions(p, grid, 10, 3);
  const std::vector<double> eps{0.1, 0.05, 0.025};
  const auto r = check_optimality_gap(p, grid, 500, 1, dirs, eps);
  EXPECT_TRUE(r.passed) << r.details;
}

TEST(OptimalityGap, LyapunovOnlyGapsAreNonNegative) {
  const LqProblem p = canned_problem("lyapunov-only");
  const TimeGrid grid(200, p.T);
  const auto dirs = random_directions(p, grid, 5, 3);
  const std::vector<double> eps{0.1, 0.05, 0.025};
  const auto r = check_optimality_gap(p, grid, 500, 1, dirs, eps);
  EXPECT_TRUE(r.passed) << r.details;
  EXPECT_LE(r.observed[0], 0.0);
  const Control zero = Control::zero(p, grid);
  for (std::uint64_t i = 0; i < 50; ++i) {
    const auto nb = sample_noise(p, grid, i, 1);
    const double base = simulate_cost(p, zero, nb, grid);
    for (const auto& v : dirs) {
      EXPECT_GE(simulate_cost(p, Control::perturbed(zero, v, 0.025), nb, grid), base);
    }
  }
}

TEST(OptimalityGap, MultiDimensionalAndRegime) {
  for (const char* name : {"coupled-2d", "two-regime"}) {
    const LqProblem p = canned_problem(name);
    const TimeGrid grid(200, p.T);
    const auto dirs = random_directions(p, grid, 4, 9);
    const std::vector<double> eps{0.1, 0.05, 0.025};
    const auto r = check_optimality_gap(p, grid, 300, 2, dirs, eps);
    EXPECT_TRUE(r.passed) << name << ": " << r.details;
  }
}

TEST(Gradient, ZeroDirection) {
  const LqProblem p = canned_problem("coupled-2d");
  const TimeGrid grid(200, p.T);
  const std::vector<Vector> v(grid.steps, Vector::Zero(1));
  const auto u = random_directions(p, grid, 1, 5)[0];
  const auto r = check_gradient(p, grid, 1000, 3, Control::open_loop(u), v);
  EXPECT_TRUE(r.passed) << r.details;
  EXPECT_EQ(r.observed[0], 0.0);
}

TEST(Gradient, RandomControlAndDirection) {
  for (const auto& name : benchmark_names()) {
    const LqProblem p = canned_problem(name);
    const TimeGrid grid(500, p.T);
    const auto uv = random_directions(p, grid, 2, 17);
    const auto r = check_gradient(p, grid, 10000, 3, Control::open_loop(uv[0]), uv[1]);
    EXPECT_TRUE(r.passed) << name << ": " << r.details;
    EXPECT_LE(r.observed[0], 1e-8) << name;
  }
}

TEST(HamiltonIdentities, ZeroProblem) {
  const LqProblem p = zero_problem();
  const TimeGrid grid(50, p.T);
  const auto sol = solve_direct(p, grid);
  const auto r = check_hamilton_identities(p, sol, optimal_law(p, sol), 20, 100, 1, 0.0);
  EXPECT_TRUE(r.passed) << r.details;
  EXPECT_EQ(r.observed[0], 0.0);
}

TEST(HamiltonIdentities, ScalarRiccatiResidualsTight) {
  const LqProblem p = canned_problem("scalar-riccati");
  const TimeGrid grid(1000, p.T);
  const auto sol = solve_direct(p, grid);
  const auto r = check_hamilton_identities(p, sol, optimal_law(p, sol), 100, 10000, 1, 0.0);
  EXPECT_TRUE(r.passed) << r.details;
  EXPECT_LT(r.observed[0], 1e-12);
}

TEST(HamiltonIdentities, EveryBenchmark) {
  for (const auto& name : benchmark_names()) {
    const LqProblem p = canned_problem(name);
    const TimeGrid grid(1000, p.T);
    const auto sol = solve_direct(p, grid);
    const auto r = check_hamilton_identities(p, sol, optimal_law(p, sol), 100, 4000, 1,
                                             pinned_bias_constant(name));
    EXPECT_TRUE(r.passed) << name << ": " << r.details;
  }
}

TEST(HamiltonIdentities, FlippedGainFails) {
  const LqProblem p = canned_problem("coupled-2d");
  const TimeGrid grid(200, p.T);
  const auto sol = solve_direct(p, grid);
  const auto r = check_hamilton_identities(p, sol, flipped(optimal_law(p, sol)), 10, 500, 1, 5.0);
  EXPECT_FALSE(r.passed);
  EXPECT_GT(r.observed[0], 1e-10);
}

TEST(MonotoneScheme, LyapunovOnlyConvergesAtOnce) {
  const LqProblem p = canned_problem("lyapunov-only");
  const auto r = check_monotone_scheme(p, TimeGrid(200, p.T), 1e-8);
  EXPECT_TRUE(r.passed) << r.details;
}

TEST(MonotoneScheme, ScalarRiccatiCertificates) {
  const LqProblem p = canned_problem("scalar-riccati");
  const TimeGrid grid(200, p.T);
  const auto r = check_monotone_scheme(p, grid, 1e-8);
  EXPECT_TRUE(r.passed) << r.details;
  const auto trace = solve_quasilinearization(p, grid, 1e-8).trace;
  for (double c : trace.certificates) EXPECT_GE(c, -1e-10);
}

TEST(MonotoneScheme, RandomRegimeProblem) {
  const LqProblem p = canned_problem("random-psd(11,3,2,2,2,2)");
  const auto r = check_monotone_scheme(p, TimeGrid(200, p.T), 1e-8);
  EXPECT_TRUE(r.passed) << r.details;
}

TEST(Homogeneity, EveryBenchmark) {
  for (const auto& name : benchmark_names()) {
    const LqProblem p = canned_problem(name);
    const auto r = check_homogeneity(p, TimeGrid(100, p.T));
    EXPECT_TRUE(r.passed) << name << ": " << r.details;
  }
}

TEST(Calibration, DeterministicAndNonNegative) {
  const LqProblem p = canned_problem("coupled-2d");
  const TimeGrid grid(200, p.T);
  const double c = calibrate_bias_constant(p, grid, 500, 4);
  EXPECT_GE(c, 0.0);
  EXPECT_EQ(c, calibrate_bias_constant(p, grid, 500, 4));
  EXPECT_THROW(calibrate_bias_constant(p, TimeGrid(201, p.T), 500, 4), std::invalid_argument);
}

TEST(Calibration, PinnedConstants) {
  EXPECT_EQ(pinned_bias_constant("scalar-riccati"), 0.0);
  EXPECT_GT(pinned_bias_constant("coupled-2d"), 0.0);
  EXPECT_LT(pinned_bias_constant("random-psd(1,2,1,1,1)"), 0.0);
}

TEST(Suite, DeterministicAndPrefixed) {
  const LqProblem p = canned_problem("two-regime");
  SuiteOptions opt;
  opt.steps = 100;
  opt.paths = 200;
  opt.gap_paths = 50;
  opt.directions = 2;
  opt.bias_constant = pinned_bias_constant("two-regime");
  const auto a = run_suite(p, "tr", opt);
  const auto b = run_suite(p, "tr", opt);
  ASSERT_EQ(a.size(), b.size());
  std::ostringstream sa, sb;
  write_reports_csv(sa, a);
  write_reports_csv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  for (const auto& r : a) EXPECT_EQ(r.name.rfind("tr/", 0), 0u) << r.name;
}

TEST(Suite, FlippedGainFailsHamilton) {
  const LqProblem p = canned_problem("two-regime");
  SuiteOptions opt;
  opt.steps = 100;
  opt.paths = 500;
  opt.gap_paths = 50;
  opt.directions = 2;
  opt.bias_constant = 2.5;
  opt.flip_gain_sign = true;
  bool hamilton_failed = false;
  for (const auto& r : run_suite(p, "x", opt)) {
    if (r.name == "x/hamilton_identities") hamilton_failed = !r.passed;
  }
  EXPECT_TRUE(hamilton_failed);
}

TEST(Suite, PassedMatchesBounds) {
  const LqProblem p = canned_problem("coupled-2d");
  SuiteOptions opt;
  opt.steps = 200;
  opt.paths = 2;
  opt.gap_paths = 2;
  opt.directions = 2;
  opt.bias_constant = 5.0;
  for (const auto& r : run_suite(p, "c", opt)) {
    ASSERT_EQ(r.observed.size(), r.bound.size()) << r.name;
    bool within = true;
    for (std::size_t i = 0; i < r.observed.size(); ++i) within = within && r.observed[i] <= r.bound[i];
    EXPECT_EQ(r.passed, within) << r.name;
  }
}

TEST(Export, ReportsCsvSchema) {
  const std::vector<CheckReport> reports{{"a/value_match", true, {1.5, 2.0}, {3.0, 4.0}, 0.0, 0.0, "x, \"y\""}};
  std::ostringstream os;
  write_reports_csv(os, reports);
  EXPECT_EQ(os.str(), "name,passed,observed,bound,details\na/value_match,true,1.5;2,3;4,\"x, \"\"y\"\"\"\n");
}

TEST(Export, ReportsJsonSchema) {
  const std::vector<CheckReport> reports{
      {"a", false, {1.0, std::numeric_limits<double>::infinity()}, {2.0, 0.5}, 0.25, 0.125, "d"}};
  std::ostringstream os;
  write_reports_json(os, reports);
  const auto j = nlohmann::json::parse(os.str());
  ASSERT_TRUE(j.is_array());
  ASSERT_EQ(j.size(), 1u);
  EXPECT_EQ(j[0]["name"], "a");
  EXPECT_EQ(j[0]["passed"], false);
  EXPECT_EQ(j[0]["observed"][0], 1.0);
  EXPECT_TRUE(j[0]["observed"][1].is_null());
  EXPECT_EQ(j[0]["bound"][1], 0.5);
  EXPECT_EQ(j[0]["details"], "d");
}
