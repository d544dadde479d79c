#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "jumplq/benchmarks.hpp"
#include "jumplq/errors.hpp"
#include "jumplq/feedback.hpp"
#include "jumplq/montecarlo.hpp"
#include "jumplq/problem_io.hpp"
#include "jumplq/riccati.hpp"
#include "jumplq/verify.hpp"

namespace jumplq::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Loaded {
  LqProblem problem;
  std::string label;
};

Loaded load(const RunConfig& cfg) {
  if (cfg.problem_path.empty() == cfg.benchmark.empty()) {
    throw InvalidProblem("exactly one of --problem and --benchmark is required");
  }
  Loaded out;
  if (!cfg.benchmark.empty()) {
    out.problem = canned_problem(cfg.benchmark);
    out.label = cfg.benchmark;
  } else {
    out.problem = load_problem(cfg.problem_path);
    out.label = fs::path(cfg.problem_path).stem().string();
  }
  if (const auto report = validate(out.problem); !report.ok()) {
    throw InvalidProblem(report.joined());
  }
  return out;
}

TimeGrid make_grid(const RunConfig& cfg, const LqProblem& p) {
  if (cfg.steps < 1) throw InvalidProblem("--steps must be at least 1");
  return TimeGrid(cfg.steps, p.T);
}

/// Writes to --out when given, otherwise to `fallback`.
void emit(const RunConfig& cfg, std::ostream& fallback, const std::function<void(std::ostream&)>& body) {
  if (cfg.out_path.empty()) {
    body(fallback);
    return;
  }
  std::ofstream file(cfg.out_path, std::ios::binary);
  if (!file) throw std::runtime_error(fmt::format("cannot open {} for writing", cfg.out_path));
  body(file);
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error(fmt::format("cannot open {} for writing", path.string()));
  body(file);
}

json matrix_json(const Matrix& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const NonFinite& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kNonFinite;
  } catch (const ParseError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kInvalidInput;
  } catch (const InvalidProblem& e) {
    fmt::print(err, "error: invalid problem: {}\n", e.what());
    return kInvalidInput;
  } catch (const UnknownBenchmark& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kInvalidInput;
  } catch (const Error& e) {
    fmt::print(err, "error: solver: {}\n", e.what());
    return kSolverError;
  } catch (const std::invalid_argument& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kInvalidInput;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kSolverError;
  }
}

}  // namespace

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto [p, label] = load(cfg);
    const TimeGrid grid = make_grid(cfg, p);
    RiccatiSolution sol;
    std::size_t iterations = 0;
    if (cfg.method == "quasilinearization") {
      auto ql = solve_quasilinearization(p, grid, cfg.tol, cfg.max_iter);
      iterations = ql.solution.diagnostics.iterations;
      sol = std::move(ql.solution);
    } else {
      sol = solve_direct(p, grid);
    }
    const FeedbackLaw law = gain_from_riccati(p, sol);
    const double value = optimal_value(sol, p.x0, p.r0);

    const fs::path k_path = cfg.out_path.empty() ? fs::path("solution.csv") : fs::path(cfg.out_path);
    const fs::path stem = k_path.parent_path() / k_path.stem();
    write_file(k_path, [&](std::ostream& os) { write_solution_csv(os, sol); });
    write_file(stem.string() + "_diagnostics.csv",
               [&](std::ostream& os) { write_diagnostics_csv(os, sol); });
    write_file(stem.string() + "_gain.csv", [&](std::ostream& os) { write_gain_csv(os, law); });

    if (cfg.format == Format::kJson) {
      json doc;
      doc["problem"] = label;
      doc["method"] = sol.diagnostics.method;
      doc["iterations"] = iterations;
      doc["steps"] = grid.steps;
      json k0 = json::array();
      for (std::size_t r = 0; r < sol.regimes(); ++r) k0.push_back(matrix_json(sol.K[0][r].matrix()));
      doc["K0"] = std::move(k0);
      doc["value"] = value;
      out << doc.dump(2) << "\n";
    } else {
      fmt::print(out, "problem: {}\nmethod: {}\n", label, sol.diagnostics.method);
      for (std::size_t r = 0; r < sol.regimes(); ++r) {
        fmt::print(out, "K(0) regime {}:\n", r);
        const Matrix& k = sol.K[0][r].matrix();
        for (Eigen::Index i = 0; i < k.rows(); ++i) {
          for (Eigen::Index j = 0; j < k.cols(); ++j) {
            fmt::print(out, "{}{:.12g}", j == 0 ? "  " : " ", k(i, j));
          }
          fmt::print(out, "\n");
        }
      }
      fmt::print(out, "value: {:.12g}\n", value);
    }
    return kOk;
  });
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto [p, label] = load(cfg);
    const TimeGrid grid = make_grid(cfg, p);
    if (cfg.paths < 2) throw InvalidProblem("--paths must be at least 2");
    Control ctrl = Control::zero(p, grid);
    if (cfg.control == "feedback") {
      ctrl = Control::feedback(gain_from_riccati(p, solve_direct(p, grid)));
    } else if (cfg.control != "zero") {
      throw std::invalid_argument(fmt::format("unknown control '{}'", cfg.control));
    }
    const McEstimate est = estimate_cost(p, ctrl, grid, cfg.paths, cfg.seed);
    const EstimateRow row{label + "/" + cfg.control, est, grid.steps, cfg.seed};
    emit(cfg, out, [&](std::ostream& os) {
      if (cfg.format == Format::kJson) {
        const json doc{{"label", row.label},     {"mean", est.mean},   {"stderr", est.std_error},
                       {"paths", est.paths},     {"steps", row.steps}, {"seed", row.seed}};
        os << doc.dump(2) << "\n";
      } else {
        write_estimates_csv(os, std::span<const EstimateRow>(&row, 1));
      }
    });
    return kOk;
  });
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto [p, label] = load(cfg);
    if (cfg.paths < 2) throw InvalidProblem("--paths must be at least 2");
    SuiteOptions opt;
    opt.steps = cfg.steps;
    opt.paths = cfg.paths;
    opt.gap_paths = std::max<std::size_t>(2, std::min(cfg.gap_paths, cfg.paths));
    opt.seed = cfg.seed;
    opt.tol = cfg.tol;
    opt.max_iter = cfg.max_iter;
    opt.flip_gain_sign = cfg.flip_gain_sign;
    if (cfg.bias_constant) {
      opt.bias_constant = *cfg.bias_constant;
    } else if (!cfg.benchmark.empty()) {
      opt.bias_constant = pinned_bias_constant(cfg.benchmark);
    }
    const auto reports = run_suite(p, label, opt);
    emit(cfg, out, [&](std::ostream& os) {
      if (cfg.format == Format::kJson) {
        write_reports_json(os, reports);
      } else {
        write_reports_csv(os, reports);
      }
    });
    std::vector<std::string> failed;
    for (const auto& r : reports) {
      if (!r.passed) failed.push_back(r.name);
    }
    if (failed.empty()) return kOk;
    fmt::print(err, "failed checks: {}\n", fmt::join(failed, ", "));
    return kVerifyFailed;
  });
}

int cmd_export(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto [p, label] = load(cfg);
    emit(cfg, out, [&](std::ostream& os) { os << problem_to_json(p); });
    return kOk;
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::string format = "csv";
  double bias = -1.0;

  CLI::App app{"Riccati solver and Monte Carlo verifier for LQ control of jump diffusions", "jumplq"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--problem", cfg.problem_path, "Problem JSON file");
    sub->add_option("--benchmark", cfg.benchmark, "Built-in benchmark name instead of a file");
    sub->add_option("--steps", cfg.steps, "Time steps on [0, T]")->check(CLI::PositiveNumber);
    sub->add_option("--paths", cfg.paths, "Monte Carlo paths")->check(CLI::Range(2ul, 1ul << 40));
    sub->add_option("--seed", cfg.seed, "Random seed");
    sub->add_option("--tol", cfg.tol, "Quasilinearization tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", cfg.max_iter, "Quasilinearization iteration cap");
    sub->add_option("--out", cfg.out_path, "Output file");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  };

  auto* solve = app.add_subcommand("solve", "Solve the Riccati equation and export K, diagnostics and gains");
  add_common(solve);
  solve->add_option("--method", cfg.method, "direct or quasilinearization")
      ->check(CLI::IsMember({"direct", "quasilinearization"}));

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo cost estimate");
  add_common(simulate);
  simulate->add_option("--control", cfg.control, "feedback or zero")
      ->check(CLI::IsMember({"feedback", "zero"}));

  auto* verify = app.add_subcommand("verify", "Run the full check suite");
  add_common(verify);
  verify->add_option("--gap-paths", cfg.gap_paths, "Paths for the optimality-gap check");
  verify->add_option("--bias-constant", bias, "Euler bias constant c (default: pinned or calibrated)")
      ->check(CLI::NonNegativeNumber);
  verify->add_flag("--flip-gain-sign", cfg.flip_gain_sign, "Negate the optimal gain");

  auto* exporter = app.add_subcommand("export", "Write a problem as JSON");
  add_common(exporter);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInvalidInput;
  }
  cfg.format = format == "json" ? Format::kJson : Format::kCsv;
  if (bias >= 0.0) cfg.bias_constant = bias;

  if (solve->parsed()) return cmd_solve(cfg, out, err);
  if (simulate->parsed()) return cmd_simulate(cfg, out, err);
  if (verify->parsed()) return cmd_verify(cfg, out, err);
  return cmd_export(cfg, out, err);
}

}  // namespace jumplq::cli
