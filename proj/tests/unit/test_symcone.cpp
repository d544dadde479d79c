#include <random>

#include <gtest/gtest.h>

#include "jumplq/errors.hpp"
#include "jumplq/symcone.hpp"

using namespace jumplq;

TEST(SymMat, SymmetrizesOnConstruction) {
  Matrix a(2, 2);
  a << 1.0, 2.0, 4.0, 3.0;
  const SymMat s(a);
  EXPECT_EQ(s(0, 1), 3.0);
  EXPECT_EQ(s(0, 1), s(1, 0));
}

TEST(SymMat, SymmetryIsBitExactForRandomInput) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    Matrix a(4, 4);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
    const SymMat s(a);
    EXPECT_EQ(s.matrix(), s.matrix().transpose());
    const SymMat t = 0.3 * s + s - SymMat::identity(4);
    EXPECT_EQ(t.matrix(), t.matrix().transpose());
  }
}

TEST(MinEigenvalue, Identity) { EXPECT_DOUBLE_EQ(min_eigenvalue(SymMat::identity(3)), 1.0); }
TEST(MinEigenvalue, Zero) { EXPECT_EQ(min_eigenvalue(SymMat::zero(2)), 0.0); }
TEST(MinEigenvalue, Diagonal) { EXPECT_DOUBLE_EQ(min_eigenvalue(SymMat::diag({2.0, -1.0})), -1.0); }

TEST(MinEigenvalue, DeterministicForFixedInput) {
  Matrix a(3, 3);
  a << 2, 1, 0.5, 1, 3, 0.2, 0.5, 0.2, 1;
  const SymMat s(a);
  EXPECT_EQ(min_eigenvalue(s), min_eigenvalue(s));
}

TEST(IsPsd, Identity) { EXPECT_TRUE(is_psd(SymMat::identity(2), 0.0)); }
TEST(IsPsd, SmallNegativeBeyondTolerance) { EXPECT_FALSE(is_psd(SymMat::diag({2.0, -1e-3}), 1e-6)); }
TEST(IsPsd, Zero) { EXPECT_TRUE(is_psd(SymMat::zero(4), 0.0)); }

TEST(IsPsd, MonotoneInTolerance) {
  const SymMat a = SymMat::diag({1.0, -1e-4});
  const double tols[] = {0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1.0};
  bool seen_true = false;
  for (double t : tols) {
    const bool r = is_psd(a, t);
    if (seen_true) EXPECT_TRUE(r) << t;
    seen_true = seen_true || r;
  }
  EXPECT_TRUE(seen_true);
}

TEST(SpdSolve, ScaledIdentity) {
  const Matrix x = spd_solve(2.0 * SymMat::identity(2), Matrix::Identity(2, 2), 1e-10);
  EXPECT_TRUE(x.isApprox(0.5 * Matrix::Identity(2, 2), 1e-15));
}

TEST(SpdSolve, BelowFloorThrows) {
  EXPECT_THROW(spd_solve(SymMat::diag({1.0, 1e-14}), Matrix::Identity(2, 2), 1e-10),
               NotUniformlyPositive);
}

TEST(SpdSolve, TwoByTwo) {
  Matrix a(2, 2);
  a << 2, 1, 1, 2;
  const Matrix x = spd_solve(SymMat(a), Matrix::Ones(2, 1), 1e-10);
  EXPECT_NEAR(x(0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(x(1), 1.0 / 3.0, 1e-15);
}

TEST(SpdSolve, ReportsMinEigenvalue) {
  try {
    spd_solve(SymMat::diag({1.0, -0.5}), Matrix::Identity(2, 2), 1e-10);
    FAIL() << "expected NotUniformlyPositive";
  } catch (const NotUniformlyPositive& e) {
    EXPECT_DOUBLE_EQ(e.min_eig(), -0.5);
  }
}

TEST(SpdSolve, RecoversSolutionForWellSeparatedSpectrum) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(1e-6, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 1 + trial % 5;
    Matrix g(n, n);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
    const Eigen::HouseholderQR<Matrix> qr(g);
    const Matrix q = qr.householderQ();
    Vector lambda(n);
    for (Eigen::Index i = 0; i < n; ++i) lambda(i) = unif(rng);
    const SymMat a(q * lambda.asDiagonal() * q.transpose());
    ASSERT_GE(min_eigenvalue(a), 1e-6 * (1 - 1e-6));
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = normal(rng);
    const Matrix y = spd_solve(a, a.matrix() * x, 1e-7);
    EXPECT_LE((y - x).norm() / x.norm(), 1e-10) << "trial " << trial;
  }
}

TEST(FrobeniusDistance, Basic) {
  EXPECT_DOUBLE_EQ(frobenius_distance(SymMat::identity(2), SymMat::zero(2)), std::sqrt(2.0));
}

TEST(ClampSmallNegative, ClampsRoundingAndReportsMin) {
  SymMat a = SymMat::diag({1.0, -1e-10});
  const double before = clamp_small_negative(a, 1e-8);
  EXPECT_DOUBLE_EQ(before, -1e-10);
  EXPECT_GE(min_eigenvalue(a), 0.0);
  EXPECT_NEAR(a(0, 0), 1.0, 1e-15);
}

TEST(ClampSmallNegative, LeavesPsdUntouched) {
  Matrix m(2, 2);
  m << 2, 0.3, 0.3, 1;
  SymMat a(m);
  const SymMat copy = a;
  clamp_small_negative(a, 1e-8);
  EXPECT_EQ(a, copy);
}

TEST(ClampSmallNegative, LeavesLargeNegativeForCaller) {
  SymMat a = SymMat::diag({1.0, -1e-3});
  EXPECT_DOUBLE_EQ(clamp_small_negative(a, 1e-8), -1e-3);
}
