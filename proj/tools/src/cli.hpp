#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace jumplq::cli {

enum ExitCode : int {
  kOk = 0,
  kVerifyFailed = 1,
  kInvalidInput = 2,
  kSolverError = 3,
  kNonFinite = 4,
};

enum class Format { kCsv, kJson };

struct RunConfig {
  std::string command;
  std::string problem_path;
  std::string benchmark;
  std::size_t steps = 1000;
  std::size_t paths = 10000;
  std::uint64_t seed = 42;
  double tol = 1e-8;
  std::size_t max_iter = 50;
  std::string out_path;
  Format format = Format::kCsv;

  // solve
  std::string method = "direct";
  // simulate
  std::string control = "feedback";
  // verify
  std::size_t gap_paths = 1000;
  std::optional<double> bias_constant;
  bool flip_gain_sign = false;
};

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_export(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches. Never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace jumplq::cli
