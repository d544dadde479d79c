#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "jumplq/problem.hpp"
#include "jumplq/riccati.hpp"

namespace jumplq {

/// Optimal state feedback u_t = Theta(t, r_{t-}) X_{t-}, tabulated at grid nodes.
struct FeedbackLaw {
  TimeGrid grid;
  std::vector<std::vector<Matrix>> gain;  // [node][regime], m x n

  const Matrix& at(std::size_t node, std::size_t regime = 0) const { return gain[node][regime]; }
  friend bool operator==(const FeedbackLaw& a, const FeedbackLaw& b);
};

/// Theta = -Nhat^{-1} Bhat' at every node, using the slice that is active on
/// the interval the node opens. The minus sign makes u = Theta x the
/// minimizer of the quadratic in u, so stationarity_residual vanishes there.
FeedbackLaw gain_from_riccati(const LqProblem& p, const RiccatiSolution& sol);

/// <K(0, r0) x0, x0>.
double optimal_value(const RiccatiSolution& sol, const Vector& x0, std::size_t r0 = 0);

/// Adjoint components (p, q^i, r(theta_k)) of the Hamilton system.
struct AdjointTriple {
  Vector p;
  std::vector<Vector> q;  // one per Brownian component
  std::vector<Vector> r;  // one per mark
};

/// Closed-form adjoint along an optimal trajectory:
///   p = 2 K x,  q_i = 2 (K C_i x + K D_i u),
///   r_k = 2 [(H_k + K E_k + H_k E_k) x + (K + H_k) F_k u].
/// The factor 2 matches the adjoint terminal condition p_T = 2 M X_T and
/// gives <p_0, x0> = 2 inf J.
AdjointTriple adjoint_along(const CoefficientSlice& s, const SymMat& K, std::span<const SymMat> H,
                            const Vector& x, const Vector& u);

/// 2 N u + B' p + sum_i D_i' q_i + sum_k nu_k F_k' r_k (the u-gradient of the Hamiltonian).
Vector stationarity_residual(const CoefficientSlice& s, const MarkSpace& marks, const Vector& u,
                             const AdjointTriple& adj);

/// <p, Ax+Bu> + sum_i <q_i, C_i x + D_i u> + sum_k nu_k <r_k, E_k x + F_k u>
/// + <Q x, x> + <N u, u>.
double hamiltonian(const CoefficientSlice& s, const MarkSpace& marks, const Vector& x,
                   const Vector& u, const AdjointTriple& adj);

/// CSV with header t,regime,row,col,theta.
void write_gain_csv(std::ostream& os, const FeedbackLaw& law);

}  // namespace jumplq
