#include "jumplq/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "jumplq/errors.hpp"
#include "jumplq/parallel.hpp"
#include "jumplq/rng.hpp"

namespace jumplq {

namespace {

constexpr double kStationarityTol = 1e-10;
constexpr double kPairingRelTol = 1e-8;
constexpr double kRatioRelTol = 1e-6;
constexpr double kCentralDifferenceEps = 1e-3;
constexpr double kRoundingFloor = 1e-12;

double rounding(double reference) { return kRoundingFloor * (1.0 + std::abs(reference)); }

bool within(const std::vector<double>& observed, const std::vector<double>& bound) {
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(observed[i] <= bound[i])) return false;
  }
  return true;
}

CheckReport value_match_with(const LqProblem& p, const RiccatiSolution& sol,
                             const FeedbackLaw& law, std::size_t n_paths, std::uint64_t seed,
                             double bias_constant) {
  const auto est = estimate_cost(p, Control::feedback(law), sol.grid, n_paths, seed);
  const double oracle = optimal_value(sol, p.x0, p.r0);
  CheckReport rep;
  rep.name = "value_match";
  rep.stat_allowance = 3.0 * est.std_error;
  rep.disc_allowance = bias_constant * sol.grid.dt();
  rep.observed = {std::abs(est.mean - oracle)};
  rep.bound = {rep.stat_allowance + rep.disc_allowance + rounding(oracle)};
  rep.passed = within(rep.observed, rep.bound);
  rep.details = fmt::format("mc={:.10g} stderr={:.3g} oracle={:.10g} paths={}", est.mean,
                            est.std_error, oracle, n_paths);
  return rep;
}

CheckReport gap_with(const LqProblem& p, const FeedbackLaw& law, const TimeGrid& grid,
                     std::size_t n_paths, std::uint64_t seed,
                     std::span<const std::vector<Vector>> directions,
                     std::span<const double> eps_list) {
  const std::size_t V = directions.size(), E = eps_list.size();
  // [path][v * E + e]
  std::vector<std::vector<double>> gap(n_paths), even(n_paths), odd(n_paths);
  parallel_for(n_paths, worker_count(), [&](std::size_t i) {
    const NoiseBundle noise = sample_noise(p, grid, i, seed);
    const Path base = simulate(p, Control::feedback(law), noise, grid);
    gap[i].resize(V * E);
    even[i].resize(V * E);
    odd[i].resize(V * E);
    for (std::size_t v = 0; v < V; ++v) {
      for (std::size_t e = 0; e < E; ++e) {
        const double eps = eps_list[e];
        std::vector<Vector> plus = base.u, minus = base.u;
        for (std::size_t k = 0; k < grid.steps; ++k) {
          plus[k] += eps * directions[v][k];
          minus[k] -= eps * directions[v][k];
        }
        const double cp = simulate_cost(p, Control::open_loop(std::move(plus)), noise, grid);
        const double cm = simulate_cost(p, Control::open_loop(std::move(minus)), noise, grid);
        gap[i][v * E + e] = cp - base.cost;
        even[i][v * E + e] = 0.5 * (cp + cm) - base.cost;
        odd[i][v * E + e] = 0.5 * (cp - cm);
      }
    }
  });

  double worst_deficit = -std::numeric_limits<double>::infinity();
  double worst_spread = 0.0;
  double worst_first_order = 0.0;
  double worst_literal_spread = 0.0;
  std::vector<double> column(n_paths);
  auto summarize_column = [&](const std::vector<std::vector<double>>& data, std::size_t idx) {
    for (std::size_t i = 0; i < n_paths; ++i) column[i] = data[i][idx];
    return summarize(column);
  };
  for (std::size_t v = 0; v < V; ++v) {
    std::vector<double> ratios, literal;
    for (std::size_t e = 0; e < E; ++e) {
      const auto g = summarize_column(gap, v * E + e);
      worst_deficit = std::max(worst_deficit, -(g.mean + 3.0 * g.std_error));
      literal.push_back(g.mean / (eps_list[e] * eps_list[e]));
      const auto s = summarize_column(even, v * E + e);
      ratios.push_back(s.mean / (eps_list[e] * eps_list[e]));
      const auto f = summarize_column(odd, v * E + e);
      if (f.std_error > 0.0) {
        worst_first_order = std::max(worst_first_order, std::abs(f.mean) / f.std_error);
      }
    }
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    const double scale = std::max(std::abs(*lo), std::abs(*hi));
    if (scale > 0.0) worst_spread = std::max(worst_spread, (*hi - *lo) / scale);
    const auto [llo, lhi] = std::minmax_element(literal.begin(), literal.end());
    const double lscale = std::max(std::abs(*llo), std::abs(*lhi));
    if (lscale > 0.0) worst_literal_spread = std::max(worst_literal_spread, (*lhi - *llo) / lscale);
  }
  CheckReport rep;
  rep.name = "optimality_gap";
  rep.observed = {V * E == 0 ? 0.0 : worst_deficit, worst_spread};
  rep.bound = {0.0, kRatioRelTol};
  rep.passed = within(rep.observed, rep.bound);
  rep.details = fmt::format(
      "observed[0] = max over (v,eps) of -(gap + 3 stderr); observed[1] = relative spread of the "
      "second-order gap / eps^2; directions={} eps_count={} paths={} max |first-order z|={:.3g} "
      "spread of the full gap / eps^2={:.3g}",
      V, E, n_paths, worst_first_order, worst_literal_spread);
  return rep;
}

CheckReport gradient_with(const LqProblem& p, const FeedbackLaw& law, const TimeGrid& grid,
                          std::size_t n_paths, std::uint64_t seed, const Control& u,
                          std::span<const Vector> v, std::size_t exact_bundles) {
  double worst_rel = 0.0;
  for (std::size_t i = 0; i < exact_bundles; ++i) {
    const NoiseBundle noise = sample_noise(p, grid, i, seed);
    const double pair = pathwise_pairing(p, u, v, noise, grid);
    const std::vector<Vector> dir(v.begin(), v.end());
    const double cp = simulate_cost(p, Control::perturbed(u, dir, kCentralDifferenceEps), noise, grid);
    const double cm = simulate_cost(p, Control::perturbed(u, dir, -kCentralDifferenceEps), noise, grid);
    const double central = (cp - cm) / (2.0 * kCentralDifferenceEps);
    const double diff = std::abs(central - pair);
    if (diff == 0.0) continue;
    // Relative to the pairing, floored at the cost scale so that a pairing
    // that happens to vanish on one bundle does not divide by zero.
    const double scale = std::max(std::abs(pair), 1e-12 * (1.0 + std::abs(cp + cm)));
    worst_rel = std::max(worst_rel, diff / scale);
  }
  const auto est = gradient_pairing(p, Control::feedback(law), v, grid, n_paths, seed);
  CheckReport rep;
  rep.name = "gradient";
  rep.stat_allowance = 3.0 * est.std_error;
  rep.observed = {worst_rel, std::abs(est.mean)};
  rep.bound = {kPairingRelTol, rep.stat_allowance + rounding(p.x0.squaredNorm())};
  rep.passed = within(rep.observed, rep.bound);
  rep.details = fmt::format(
      "observed[0] = max relative gap between central difference and pairing over {} bundles; "
      "observed[1] = |pairing at optimum| (mean={:.6g} stderr={:.3g} paths={})",
      exact_bundles, est.mean, est.std_error, n_paths);
  return rep;
}

}  // namespace

CheckReport check_value_match(const LqProblem& p, const TimeGrid& grid, std::size_t n_paths,
                              std::uint64_t seed, double bias_constant) {
  const auto sol = solve_direct(p, grid);
  return value_match_with(p, sol, gain_from_riccati(p, sol), n_paths, seed, bias_constant);
}

CheckReport check_optimality_gap(const LqProblem& p, const TimeGrid& grid, std::size_t n_paths,
                                 std::uint64_t seed, std::span<const std::vector<Vector>> directions,
                                 std::span<const double> eps_list) {
  const auto sol = solve_direct(p, grid);
  return gap_with(p, gain_from_riccati(p, sol), grid, n_paths, seed, directions, eps_list);
}

CheckReport check_gradient(const LqProblem& p, const TimeGrid& grid, std::size_t n_paths,
                           std::uint64_t seed, const Control& u, std::span<const Vector> v,
                           std::size_t exact_bundles) {
  const auto sol = solve_direct(p, grid);
  return gradient_with(p, gain_from_riccati(p, sol), grid, n_paths, seed, u, v, exact_bundles);
}

CheckReport check_hamilton_identities(const LqProblem& p, const RiccatiSolution& sol,
                                      const FeedbackLaw& law, std::size_t n_samples,
                                      std::size_t n_paths, std::uint64_t seed,
                                      double bias_constant) {
  const CounterStream draws(seed, 0x4A11u);
  const auto n = static_cast<Eigen::Index>(p.n);
  double worst = 0.0;
  for (std::size_t node = 0; node < sol.K.size(); ++node) {
    const double t = sol.grid.node(node);
    for (std::size_t r = 0; r < sol.regimes(); ++r) {
      const auto& s = slice_at(p, t, r);
      for (std::size_t j = 0; j < n_samples; ++j) {
        Vector x(n);
        for (Eigen::Index i = 0; i < n; ++i) {
          x(i) = draws.normal(static_cast<std::uint32_t>(node),
                              static_cast<std::uint32_t>((r * n_samples + j) * p.n + i), 0);
        }
        const Vector u = law.at(node, r) * x;
        const auto adj = adjoint_along(s, sol.K[node][r], sol.H[node][r], x, u);
        const double res = stationarity_residual(s, p.marks, u, adj).norm();
        worst = std::max(worst, res / (1.0 + x.norm()));
      }
    }
  }
  const auto est = estimate_cost(p, Control::feedback(law), sol.grid, n_paths, seed);
  const Vector p0 = 2.0 * (sol.at(0, p.r0).matrix() * p.x0);
  const double dual = p0.dot(p.x0);
  CheckReport rep;
  rep.name = "hamilton_identities";
  rep.stat_allowance = 3.0 * 2.0 * est.std_error;
  rep.disc_allowance = 2.0 * bias_constant * sol.grid.dt();
  rep.observed = {worst, std::abs(2.0 * est.mean - dual)};
  rep.bound = {kStationarityTol, rep.stat_allowance + rep.disc_allowance + rounding(dual)};
  rep.passed = within(rep.observed, rep.bound);
  rep.details = fmt::format(
      "observed[0] = max stationarity residual / (1 + |x|) over {} states per node/regime; "
      "observed[1] = |2 J_mc - <p_0, x0>| (2J={:.10g}, <p_0,x0>={:.10g})",
      n_samples, 2.0 * est.mean, dual);
  return rep;
}

CheckReport check_monotone_scheme(const LqProblem& p, const TimeGrid& grid, double tol,
                                  std::size_t max_iter) {
  CheckReport rep;
  rep.name = "monotone_scheme";
  const double agreement = std::max(10.0 * tol, 1e-6);
  rep.bound = {kPsdClamp, kPsdClamp, agreement};
  try {
    const auto ql = solve_quasilinearization(p, grid, tol, max_iter);
    const auto direct = solve_direct(p, grid);
    const auto& tr = ql.trace;
    const double cert = tr.certificates.empty()
                            ? 0.0
                            : *std::min_element(tr.certificates.begin(), tr.certificates.end());
    const double lowest = *std::min_element(tr.iterate_min_eig.begin(), tr.iterate_min_eig.end());
    const double dev = sup_deviation(ql.solution, direct);
    rep.observed = {std::max(-cert, 0.0) + 0.0, std::max(-lowest, 0.0) + 0.0, dev};
    rep.passed = within(rep.observed, rep.bound);
    rep.details = fmt::format(
        "observed = (-min certificate, -min iterate eigenvalue, sup |K_ql - K_direct|); "
        "iterations={} converged_at={}",
        ql.solution.diagnostics.iterations, tr.converged_iteration);
  } catch (const MonotonicityViolation& e) {
    rep.observed = {-e.min_eig(), 0.0, std::numeric_limits<double>::infinity()};
    rep.passed = false;
    rep.details = e.what();
  }
  return rep;
}

CheckReport check_homogeneity(const LqProblem& p, const TimeGrid& grid) {
  const auto sol = solve_direct(p, grid);
  const double base = optimal_value(sol, p.x0, p.r0);
  double mismatches = 0.0;
  for (double lambda : {2.0, 0.5, -4.0, 0.125}) {
    const double scaled = optimal_value(sol, lambda * p.x0, p.r0);
    if (scaled != lambda * lambda * base) mismatches += 1.0;
  }
  LqProblem shifted = p;
  shifted.x0 = 3.7 * p.x0 + Vector::Ones(p.x0.size());
  if (!(gain_from_riccati(p, sol) == gain_from_riccati(shifted, solve_direct(shifted, grid)))) {
    mismatches += 1.0;
  }
  CheckReport rep;
  rep.name = "homogeneity";
  rep.observed = {mismatches};
  rep.bound = {0.0};
  rep.passed = within(rep.observed, rep.bound);
  rep.details = "count of failed value-scaling or gain-invariance identities";
  return rep;
}

std::vector<std::vector<Vector>> random_directions(const LqProblem& p, const TimeGrid& grid,
                                                   std::size_t count, std::uint64_t seed) {
  std::vector<std::vector<Vector>> out(count);
  for (std::size_t c = 0; c < count; ++c) {
    const CounterStream stream(seed, static_cast<std::uint32_t>(0xD000u + c));
    out[c].reserve(grid.steps);
    for (std::size_t k = 0; k < grid.steps; ++k) {
      Vector v(static_cast<Eigen::Index>(p.m));
      for (std::size_t i = 0; i < p.m; ++i) {
        v(static_cast<Eigen::Index>(i)) =
            stream.normal(static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(i), 3);
      }
      out[c].push_back(std::move(v));
    }
  }
  return out;
}

double calibrate_bias_constant(const LqProblem& p, const TimeGrid& grid, std::size_t n_paths,
                               std::uint64_t seed) {
  if (grid.steps % 2 != 0) throw std::invalid_argument("bias calibration needs an even step count");
  const TimeGrid coarse(grid.steps / 2, grid.T);
  const auto fine_law = gain_from_riccati(p, solve_direct(p, grid));
  const auto coarse_law = gain_from_riccati(p, solve_direct(p, coarse));
  std::vector<double> diff(n_paths);
  parallel_for(n_paths, worker_count(), [&](std::size_t i) {
    const NoiseBundle noise = sample_noise(p, grid, i, seed);
    diff[i] = simulate_cost(p, Control::feedback(coarse_law), coarsen(noise), coarse) -
              simulate_cost(p, Control::feedback(fine_law), noise, grid);
  });
  const auto est = summarize(diff);
  return (std::abs(est.mean) + 3.0 * est.std_error) / grid.dt();
}

double pinned_bias_constant(std::string_view benchmark) {
  // calibrate_bias_constant at dt = 1e-3 with 20000 paths and seed 43, then
  // doubled and rounded up. The scalar benchmark's Euler cost telescopes
  // exactly, so its constant is zero.
  static const std::map<std::string_view, double> table{
      {"scalar-riccati", 0.0},       // measured 0
      {"lyapunov-only", 75.0},       // measured 35.46
      {"two-regime-symmetric", 2.5}, // measured 1.228
      {"two-regime", 2.5},           // measured 1.216
      {"coupled-2d", 5.0},           // measured 2.356
      {"zero-dynamics", 0.0},        // measured 0
  };
  const auto it = table.find(benchmark);
  return it == table.end() ? -1.0 : it->second;
}

std::vector<CheckReport> run_suite(const LqProblem& p, const std::string& label,
                                   const SuiteOptions& opt) {
  const TimeGrid grid(opt.steps, p.T);
  double c = opt.bias_constant;
  if (c < 0.0) c = calibrate_bias_constant(p, grid, std::min<std::size_t>(opt.paths, 2000), opt.seed + 1);

  const auto sol = solve_direct(p, grid);
  FeedbackLaw law = gain_from_riccati(p, sol);
  if (opt.flip_gain_sign) {
    for (auto& row : law.gain) {
      for (auto& g : row) g = -g;
    }
  }
  std::vector<CheckReport> reports;
  reports.push_back(value_match_with(p, sol, law, opt.paths, opt.seed, c));

  const auto directions = random_directions(p, grid, opt.directions, opt.seed + 2);
  reports.push_back(gap_with(p, law, grid, opt.gap_paths, opt.seed, directions, opt.eps_list));

  const auto u = random_directions(p, grid, 1, opt.seed + 3).front();
  const auto v = random_directions(p, grid, 1, opt.seed + 4).front();
  reports.push_back(gradient_with(p, law, grid, opt.paths, opt.seed, Control::open_loop(u), v,
                                  std::min<std::size_t>(16, opt.paths)));

  reports.push_back(check_hamilton_identities(p, sol, law, opt.n_samples, opt.paths, opt.seed, c));
  reports.push_back(check_monotone_scheme(p, grid, opt.tol, opt.max_iter));
  reports.push_back(check_homogeneity(p, grid));
  for (auto& r : reports) {
    r.name = label.empty() ? r.name : label + "/" + r.name;
  }
  return reports;
}

namespace {

std::string joined(const std::vector<double>& values) {
  std::string out;
  for (double v : values) {
    if (!out.empty()) out += ';';
    out += fmt::format("{:.17g}", v);
  }
  return out;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

void write_reports_csv(std::ostream& os, std::span<const CheckReport> reports) {
  os << "name,passed,observed,bound,details\n";
  for (const auto& r : reports) {
    fmt::print(os, "{},{},{},{},{}\n", csv_quote(r.name), r.passed ? "true" : "false",
               joined(r.observed), joined(r.bound), csv_quote(r.details));
  }
}

void write_reports_json(std::ostream& os, std::span<const CheckReport> reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) {
    auto finite = [](const std::vector<double>& v) {
      nlohmann::json a = nlohmann::json::array();
      for (double x : v) std::isfinite(x) ? a.push_back(x) : a.push_back(nullptr);
      return a;
    };
    arr.push_back({{"name", r.name},
                   {"passed", r.passed},
                   {"observed", finite(r.observed)},
                   {"bound", finite(r.bound)},
                   {"stat_allowance", r.stat_allowance},
                   {"disc_allowance", r.disc_allowance},
                   {"details", r.details}});
  }
  os << arr.dump(2) << "\n";
}

}  // namespace jumplq
