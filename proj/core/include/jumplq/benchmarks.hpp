#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "jumplq/problem.hpp"

namespace jumplq {

/// Parameters of a randomly drawn admissible problem. regimes == 1 gives a
/// deterministic env (with control-loaded jumps F), regimes >= 2 a regime env.
struct RandomPsdParams {
  std::uint64_t seed = 0;
  std::size_t n = 2;
  std::size_t m = 1;
  std::size_t d = 1;
  std::size_t marks = 1;
  std::size_t regimes = 1;
};

/// Benchmark by name: scalar-riccati, lyapunov-only, two-regime-symmetric,
/// two-regime, coupled-2d, zero-dynamics, or random-psd(seed,n,m,d,K[,R]).
/// Throws UnknownBenchmark otherwise.
LqProblem canned_problem(std::string_view name);

LqProblem random_psd_problem(const RandomPsdParams& params);

/// The named (non-random) benchmarks.
std::vector<std::string> benchmark_names();

}  // namespace jumplq
