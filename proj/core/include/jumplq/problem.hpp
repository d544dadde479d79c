#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "jumplq/symcone.hpp"

namespace jumplq {

/// Finite mark set with arrival intensities (the Levy measure nu).
struct MarkSpace {
  std::vector<std::string> labels;
  std::vector<double> weights;

  std::size_t size() const noexcept { return weights.size(); }
};

double total_intensity(const MarkSpace& marks);

/// Coefficients of the state equation and cost on one table interval.
///
///   dX = (A X + B u) dt + sum_i (C_i X + D_i u) dW_i
///        + sum_k (E_k X- + F_k u) (N_k(dt) - nu_k dt)
struct CoefficientSlice {
  Matrix A;               // n x n
  Matrix B;               // n x m
  std::vector<Matrix> C;  // d of n x n
  std::vector<Matrix> D;  // d of n x m
  std::vector<Matrix> E;  // per mark, n x n
  std::vector<Matrix> F;  // per mark, n x m
  SymMat Q;
  SymMat N;
};

/// Piecewise-constant table: slices[j] is active on [grid[j], grid[j+1]),
/// the last one also at grid.back().
struct SliceTable {
  std::vector<double> grid;
  std::vector<CoefficientSlice> slices;

  const CoefficientSlice& at(double t) const;
  std::size_t interval_of(double t) const;
};

struct DeterministicCoefficients {
  SliceTable table;
};

/// Coefficients driven by a finite regime that moves only when a mark fires:
/// regime r jumps to jump_map[r][k] on an arrival of mark k. F must vanish.
struct RegimeCoefficients {
  std::vector<SliceTable> regimes;
  std::vector<std::vector<std::size_t>> jump_map;
};

using CoefficientEnv = std::variant<DeterministicCoefficients, RegimeCoefficients>;

struct LqProblem {
  std::size_t n = 1;
  std::size_t m = 1;
  std::size_t d = 0;
  double T = 1.0;
  Vector x0;
  MarkSpace marks;
  CoefficientEnv env;
  SymMat M;
  double delta = 1e-6;
  std::size_t r0 = 0;  // initial regime

  bool is_regime() const noexcept { return std::holds_alternative<RegimeCoefficients>(env); }
  std::size_t regime_count() const noexcept;
  /// Regime reached from r when mark k fires; the identity for deterministic envs.
  std::size_t jump_target(std::size_t r, std::size_t k) const;
  const SliceTable& table(std::size_t regime) const;
  /// Breakpoints of the coefficient tables (shared by every regime).
  const std::vector<double>& table_grid() const { return table(0).grid; }
};

struct ValidationReport {
  std::vector<std::string> violations;

  bool ok() const noexcept { return violations.empty(); }
  std::string joined() const;
};

ValidationReport validate(const LqProblem& p);

/// Slice active at time t in the given regime (regime ignored for
/// deterministic envs). Throws OutOfHorizon outside [0, T].
const CoefficientSlice& slice_at(const LqProblem& p, double t, std::size_t regime = 0);

}  // namespace jumplq
