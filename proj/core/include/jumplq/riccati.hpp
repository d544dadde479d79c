#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "jumplq/problem.hpp"
#include "jumplq/symcone.hpp"
#include "jumplq/time_grid.hpp"

namespace jumplq {

/// Rounding allowance for the PSD cone: eigenvalues in [-kPsdClamp, 0) are
/// clamped to zero, anything lower is reported as a violation.
inline constexpr double kPsdClamp = 1e-8;

// Pointwise building blocks of the Riccati generator. `H` holds one matrix per
// mark (the jump field K(after) - K(before)); an empty span means H = 0.

/// N + sum_i D_i' K D_i + sum_k nu_k F_k' (K + H_k) F_k.
SymMat nhat(const CoefficientSlice& s, const MarkSpace& marks, const SymMat& K,
            std::span<const SymMat> H = {});

/// K B + sum_i C_i' K D_i + sum_k nu_k [H_k F_k + E_k' (K + H_k) F_k].
Matrix bhat(const CoefficientSlice& s, const MarkSpace& marks, const SymMat& K,
            std::span<const SymMat> H = {});

/// G + Q - Bhat Nhat^{-1} Bhat', i.e. minus the drift of K excluding the
/// regime-coupling term sum_k nu_k H_k. G collects
///   K A + A' K + sum_i C_i' K C_i + sum_k nu_k [H E + E' H + E' K E + E' H E]_k.
/// Throws NotUniformlyPositive when Nhat drops below `delta`.
SymMat generator_drift(const CoefficientSlice& s, const MarkSpace& marks, const SymMat& K,
                       std::span<const SymMat> H, double delta);

/// Minimizing matrix Uhat = Nhat^{-1} Bhat'. The optimal gain is -Uhat.
Matrix optimal_u(const CoefficientSlice& s, const MarkSpace& marks, const SymMat& K,
                 std::span<const SymMat> H, double delta);

/// Linear (closed-loop) counterpart of generator_drift for a frozen U, control
/// u = -U x: the generator of K with A - B U, C_i - D_i U, E_k - F_k U in place
/// of A, C_i, E_k and running cost Q + U' N U. Equals generator_drift when
/// U = optimal_u; in general the excess is (U - Uhat)' Nhat (U - Uhat).
SymMat lyapunov_drift(const CoefficientSlice& s, const MarkSpace& marks, const SymMat& K,
                      std::span<const SymMat> H, const Matrix& U);

struct RiccatiDiagnostics {
  std::string method;
  std::size_t iterations = 0;
  std::vector<std::vector<double>> min_eig_K;     // [node][regime]
  std::vector<std::vector<double>> min_eig_Nhat;  // [node][regime]
};

struct RiccatiSolution {
  TimeGrid grid;
  std::vector<std::vector<SymMat>> K;               // [node][regime]
  std::vector<std::vector<std::vector<SymMat>>> H;  // [node][regime][mark]
  RiccatiDiagnostics diagnostics;

  std::size_t regimes() const noexcept { return K.empty() ? 0 : K.front().size(); }
  const SymMat& at(std::size_t node, std::size_t regime = 0) const { return K[node][regime]; }
};

/// Frozen U for the linear solve, sampled at both ends of every step so that
/// coefficient breakpoints on grid nodes do not smear across steps. The
/// midpoint stage uses the average.
struct StepGains {
  std::vector<std::vector<Matrix>> start;  // [step][regime], U at t_k
  std::vector<std::vector<Matrix>> end;    // [step][regime], U at t_{k+1}
};

struct IterationTrace {
  std::vector<std::vector<std::vector<SymMat>>> iterates;  // K_1, K_2, ... as [node][regime]
  std::vector<double> deviations;    // sup-node Frobenius |K_j - K_{j+1}|
  std::vector<double> certificates;  // min over nodes/regimes of min eig(K_j - K_{j+1})
  std::vector<double> iterate_min_eig;
  std::size_t converged_iteration = 0;  // j with |K_j - K_{j+1}| < tol
};

struct QuasilinearizationResult {
  RiccatiSolution solution;
  IterationTrace trace;
};

/// Backward RK4 on the (regime-stacked) Riccati ODE
///   dK_r/dt = -generator_drift(K_r, H_r) - sum_k nu_k H_{r,k},
///   H_{r,k} = K_{jump(r,k)} - K_r,  K_r(T) = M.
RiccatiSolution solve_direct(const LqProblem& p, const TimeGrid& grid);

/// Backward RK4 on the linear equation built from lyapunov_drift. A null
/// `gains` means U = 0.
RiccatiSolution solve_lyapunov(const LqProblem& p, const TimeGrid& grid,
                               const StepGains* gains = nullptr);

/// Quasilinearization: start from K_0 = 0 and solve the linear equation with U
/// frozen at Uhat(K_j) until the sup-node deviation drops below `tol`.
QuasilinearizationResult solve_quasilinearization(const LqProblem& p, const TimeGrid& grid,
                                                  double tol = 1e-8, std::size_t max_iter = 50);

/// Sup over nodes and regimes of the Frobenius distance.
double sup_deviation(const std::vector<std::vector<SymMat>>& a,
                     const std::vector<std::vector<SymMat>>& b);
double sup_deviation(const RiccatiSolution& a, const RiccatiSolution& b);

/// CSV with header t,regime,i,j,K_ij.
void write_solution_csv(std::ostream& os, const RiccatiSolution& sol);
/// CSV with header t,regime,min_eig_K,min_eig_Nhat.
void write_diagnostics_csv(std::ostream& os, const RiccatiSolution& sol);

}  // namespace jumplq
