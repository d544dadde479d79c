#pragma once

#include <Eigen/Dense>
#include <initializer_list>

namespace jumplq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense symmetric matrix. Every construction symmetrizes (A + A^T) / 2, so
/// entries(i, j) == entries(j, i) holds bit-exactly.
class SymMat {
 public:
  SymMat() : SymMat(Matrix::Zero(1, 1)) {}
  explicit SymMat(const Matrix& a);

  static SymMat zero(Eigen::Index n) { return SymMat(Matrix::Zero(n, n)); }
  static SymMat identity(Eigen::Index n) { return SymMat(Matrix::Identity(n, n)); }
  static SymMat diag(std::initializer_list<double> values);

  Eigen::Index dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  /// <A x, x>.
  double quadratic_form(const Vector& x) const { return x.dot(m_ * x); }

  SymMat& operator+=(const SymMat& o);
  SymMat& operator-=(const SymMat& o);
  SymMat& operator*=(double s);

  friend SymMat operator+(SymMat a, const SymMat& b) { return a += b; }
  friend SymMat operator-(SymMat a, const SymMat& b) { return a -= b; }
  friend SymMat operator*(double s, SymMat a) { return a *= s; }
  friend bool operator==(const SymMat& a, const SymMat& b) {
    return a.m_.rows() == b.m_.rows() && a.m_ == b.m_;
  }

 private:
  Matrix m_;
};

double min_eigenvalue(const SymMat& a);

/// True iff min_eigenvalue(a) >= -tol.
bool is_psd(const SymMat& a, double tol);

/// a^{-1} b through a Cholesky factorization. Throws NotUniformlyPositive when
/// the smallest eigenvalue of `a` is below `floor`.
Matrix spd_solve(const SymMat& a, const Matrix& b, double floor);

/// Frobenius norm of a - b.
double frobenius_distance(const SymMat& a, const SymMat& b);

/// Replaces eigenvalues in [-clamp, 0) by zero. Returns the smallest eigenvalue
/// seen before clamping; the input is untouched when it was already PSD.
double clamp_small_negative(SymMat& a, double clamp);

}  // namespace jumplq
