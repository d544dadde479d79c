#include "jumplq/symcone.hpp"

#include <cmath>
#include <stdexcept>

#include "jumplq/errors.hpp"

namespace jumplq {

SymMat::SymMat(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw std::invalid_argument("SymMat requires a non-empty square matrix");
  }
  m_ = 0.5 * (a + a.transpose());
}

SymMat SymMat::diag(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return SymMat(Matrix(v.asDiagonal()));
}

SymMat& SymMat::operator+=(const SymMat& o) {
  m_ += o.m_;
  return *this;
}

SymMat& SymMat::operator-=(const SymMat& o) {
  m_ -= o.m_;
  return *this;
}

SymMat& SymMat::operator*=(double s) {
  m_ *= s;
  return *this;
}

double min_eigenvalue(const SymMat& a) {
  if (a.dim() == 1) return a(0, 0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

bool is_psd(const SymMat& a, double tol) { return min_eigenvalue(a) >= -tol; }

Matrix spd_solve(const SymMat& a, const Matrix& b, double floor) {
  if (b.rows() != a.dim()) {
    throw std::invalid_argument("spd_solve: dimension mismatch");
  }
  const double lo = min_eigenvalue(a);
  if (!(lo >= floor)) throw NotUniformlyPositive(lo);
  Eigen::LLT<Matrix> llt(a.matrix());
  if (llt.info() != Eigen::Success) throw NotUniformlyPositive(lo);
  return llt.solve(b);
}

double frobenius_distance(const SymMat& a, const SymMat& b) {
  return (a.matrix() - b.matrix()).norm();
}

double clamp_small_negative(SymMat& a, double clamp) {
  if (a.dim() == 1) {
    const double v = a(0, 0);
    if (v < 0.0 && v >= -clamp) a = SymMat::zero(1);
    return v;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix());
  Vector lambda = es.eigenvalues();
  const double lo = lambda(0);
  if (lo >= 0.0 || lo < -clamp) return lo;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) < 0.0) lambda(i) = 0.0;
  }
  const Matrix& v = es.eigenvectors();
  a = SymMat(v * lambda.asDiagonal() * v.transpose());
  return lo;
}

}  // namespace jumplq
