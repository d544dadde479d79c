#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "jumplq/problem.hpp"

namespace jumplq::testing {

inline Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

inline CoefficientSlice zero_slice(std::size_t n, std::size_t m, std::size_t d, std::size_t marks) {
  const auto N = static_cast<Eigen::Index>(n), M = static_cast<Eigen::Index>(m);
  CoefficientSlice s;
  s.A = Matrix::Zero(N, N);
  s.B = Matrix::Zero(N, M);
  s.C.assign(d, Matrix::Zero(N, N));
  s.D.assign(d, Matrix::Zero(N, M));
  s.E.assign(marks, Matrix::Zero(N, N));
  s.F.assign(marks, Matrix::Zero(N, M));
  s.Q = SymMat::zero(N);
  s.N = SymMat::identity(M);
  return s;
}

inline MarkSpace marks_with(std::vector<double> weights) {
  MarkSpace ms;
  for (std::size_t k = 0; k < weights.size(); ++k) ms.labels.push_back("m" + std::to_string(k));
  ms.weights = std::move(weights);
  return ms;
}

/// Single-slice deterministic problem on [0, T].
inline LqProblem deterministic(CoefficientSlice s, MarkSpace marks, SymMat M, Vector x0,
                               double T = 1.0) {
  LqProblem p;
  p.n = static_cast<std::size_t>(s.A.rows());
  p.m = static_cast<std::size_t>(s.B.cols());
  p.d = s.C.size();
  p.T = T;
  p.x0 = std::move(x0);
  p.marks = std::move(marks);
  p.M = std::move(M);
  p.env = DeterministicCoefficients{SliceTable{{0.0, T}, {std::move(s)}}};
  return p;
}

/// Scalar problem dx = (a x + b u) dt + c x dW, cost q x^2 + r u^2, terminal mT x^2.
inline LqProblem scalar_problem(double a, double b, double c, double q, double r, double mT,
                                double T = 1.0) {
  CoefficientSlice s = zero_slice(1, 1, c != 0.0 ? 1 : 0, 0);
  s.A = scalar(a);
  s.B = scalar(b);
  if (c != 0.0) s.C[0] = scalar(c);
  s.Q = SymMat(scalar(q));
  s.N = SymMat(scalar(r));
  return deterministic(std::move(s), {}, SymMat(scalar(mT)), Vector::Ones(1), T);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace jumplq::testing
