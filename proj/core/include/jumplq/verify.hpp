#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "jumplq/feedback.hpp"
#include "jumplq/montecarlo.hpp"
#include "jumplq/problem.hpp"
#include "jumplq/riccati.hpp"

namespace jumplq {

/// Outcome of one check. For statistical checks the bound is the sum of
/// stat_allowance (3 standard errors), disc_allowance (c dt) and a rounding
/// floor of 1e-12 (1 + |reference|) that only matters when the standard
/// error is exactly zero.
struct CheckReport {
  std::string name;
  bool passed = false;
  std::vector<double> observed;
  std::vector<double> bound;
  double stat_allowance = 0.0;
  double disc_allowance = 0.0;
  std::string details;
};

/// |J_mc(feedback) - <K(0, r0) x0, x0>| <= 3 stderr + c dt.
CheckReport check_value_match(const LqProblem& p, const TimeGrid& grid, std::size_t n_paths,
                              std::uint64_t seed, double bias_constant);

/// For every direction and eps, common-bundle gaps J(u* + eps v) - J(u*) are
/// >= -3 stderr, and the second-order part of the gap divided by eps^2 is the
/// same for every eps to relative 1e-6.
CheckReport check_optimality_gap(const LqProblem& p, const TimeGrid& grid, std::size_t n_paths,
                                 std::uint64_t seed, std::span<const std::vector<Vector>> directions,
                                 std::span<const double> eps_list);

/// (a) pathwise central difference of the cost along v equals the pathwise
/// pairing to relative 1e-8 on `exact_bundles` bundles for the control u;
/// (b) the pairing at the realized optimal feedback is within 3 stderr of zero.
CheckReport check_gradient(const LqProblem& p, const TimeGrid& grid, std::size_t n_paths,
                           std::uint64_t seed, const Control& u, std::span<const Vector> v,
                           std::size_t exact_bundles = 16);

/// (a) stationarity residual at (x, law x) below 1e-10 (1 + |x|) for
/// `n_samples` random states at every node and regime; (b) 2 J_mc(law) is
/// within 3 stderr + 2 c dt of <p_0, x0> = 2 <K(0) x0, x0>.
CheckReport check_hamilton_identities(const LqProblem& p, const RiccatiSolution& sol,
                                      const FeedbackLaw& law, std::size_t n_samples,
                                      std::size_t n_paths, std::uint64_t seed,
                                      double bias_constant);

/// Quasilinearization certificates and iterates >= -1e-8, limit within
/// max(10 tol, 1e-6) of the direct solve.
CheckReport check_monotone_scheme(const LqProblem& p, const TimeGrid& grid, double tol,
                                  std::size_t max_iter = 50);

/// value(lambda x0) == lambda^2 value(x0) bit-exactly for powers of two and
/// the feedback law does not depend on x0.
CheckReport check_homogeneity(const LqProblem& p, const TimeGrid& grid);

/// Per-step N(0, 1) directions drawn from the seed.
std::vector<std::vector<Vector>> random_directions(const LqProblem& p, const TimeGrid& grid,
                                                   std::size_t count, std::uint64_t seed);

/// Upper confidence bound on the first-order Euler bias constant of the
/// optimal cost: (|J_dt - J_2dt| + 3 stderr) / dt with common random numbers.
/// Requires an even step count.
double calibrate_bias_constant(const LqProblem& p, const TimeGrid& grid, std::size_t n_paths,
                               std::uint64_t seed);

/// Bias constants pinned for the named benchmarks at dt = 1e-3 (negative when
/// the name has none).
double pinned_bias_constant(std::string_view benchmark);

struct SuiteOptions {
  std::size_t steps = 1000;
  std::size_t paths = 10000;
  std::size_t gap_paths = 1000;
  std::uint64_t seed = 42;
  double tol = 1e-8;
  std::size_t max_iter = 50;
  std::size_t n_samples = 100;
  std::size_t directions = 10;
  std::vector<double> eps_list{0.1, 0.05, 0.025};
  double bias_constant = -1.0;  // negative: calibrate by grid halving
  bool flip_gain_sign = false;  // harness sanity switch
};

/// Every check on one problem. Report names are prefixed with `label`.
std::vector<CheckReport> run_suite(const LqProblem& p, const std::string& label,
                                   const SuiteOptions& options);

/// CSV with header name,passed,observed,bound,details (multi-valued columns
/// joined by ';').
void write_reports_csv(std::ostream& os, std::span<const CheckReport> reports);
/// JSON array of CheckReport objects.
void write_reports_json(std::ostream& os, std::span<const CheckReport> reports);

}  // namespace jumplq
