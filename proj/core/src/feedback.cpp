#include "jumplq/feedback.hpp"

#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "jumplq/errors.hpp"

namespace jumplq {

bool operator==(const FeedbackLaw& a, const FeedbackLaw& b) {
  if (!(a.grid == b.grid) || a.gain.size() != b.gain.size()) return false;
  for (std::size_t node = 0; node < a.gain.size(); ++node) {
    if (a.gain[node].size() != b.gain[node].size()) return false;
    for (std::size_t r = 0; r < a.gain[node].size(); ++r) {
      const Matrix& x = a.gain[node][r];
      const Matrix& y = b.gain[node][r];
      if (x.rows() != y.rows() || x.cols() != y.cols() || x != y) return false;
    }
  }
  return true;
}

FeedbackLaw gain_from_riccati(const LqProblem& p, const RiccatiSolution& sol) {
  FeedbackLaw law;
  law.grid = sol.grid;
  law.gain.resize(sol.K.size());
  for (std::size_t node = 0; node < sol.K.size(); ++node) {
    const double t = sol.grid.node(node);
    law.gain[node].reserve(sol.regimes());
    for (std::size_t r = 0; r < sol.regimes(); ++r) {
      const auto& s = slice_at(p, t, r);
      try {
        const Matrix u = optimal_u(s, p.marks, sol.K[node][r], sol.H[node][r], p.delta);
        // 0 - u rather than -u keeps zero gains as +0 in exported tables.
        law.gain[node].push_back(Matrix::Zero(u.rows(), u.cols()) - u);
      } catch (const NotUniformlyPositive& e) {
        throw NotUniformlyPositive(e.min_eig(), fmt::format("node {} regime {}", node, r));
      }
    }
  }
  return law;
}

double optimal_value(const RiccatiSolution& sol, const Vector& x0, std::size_t r0) {
  return sol.at(0, r0).quadratic_form(x0);
}

AdjointTriple adjoint_along(const CoefficientSlice& s, const SymMat& K, std::span<const SymMat> H,
                            const Vector& x, const Vector& u) {
  const Matrix& k = K.matrix();
  AdjointTriple adj;
  adj.p = 2.0 * (k * x);
  adj.q.reserve(s.C.size());
  for (std::size_t i = 0; i < s.C.size(); ++i) {
    adj.q.push_back(2.0 * (k * (s.C[i] * x) + k * (s.D[i] * u)));
  }
  adj.r.reserve(s.E.size());
  for (std::size_t j = 0; j < s.E.size(); ++j) {
    Vector r = k * (s.E[j] * x) + k * (s.F[j] * u);
    if (!H.empty()) {
      const Matrix& h = H[j].matrix();
      r += h * x + h * (s.E[j] * x) + h * (s.F[j] * u);
    }
    adj.r.push_back(2.0 * r);
  }
  return adj;
}

Vector stationarity_residual(const CoefficientSlice& s, const MarkSpace& marks, const Vector& u,
                             const AdjointTriple& adj) {
  Vector out = 2.0 * (s.N.matrix() * u) + s.B.transpose() * adj.p;
  for (std::size_t i = 0; i < s.D.size(); ++i) out += s.D[i].transpose() * adj.q[i];
  for (std::size_t j = 0; j < marks.size(); ++j) {
    out += marks.weights[j] * (s.F[j].transpose() * adj.r[j]);
  }
  return out;
}

double hamiltonian(const CoefficientSlice& s, const MarkSpace& marks, const Vector& x,
                   const Vector& u, const AdjointTriple& adj) {
  double h = adj.p.dot(s.A * x + s.B * u);
  for (std::size_t i = 0; i < s.C.size(); ++i) h += adj.q[i].dot(s.C[i] * x + s.D[i] * u);
  for (std::size_t j = 0; j < marks.size(); ++j) {
    h += marks.weights[j] * adj.r[j].dot(s.E[j] * x + s.F[j] * u);
  }
  return h + s.Q.quadratic_form(x) + s.N.quadratic_form(u);
}

void write_gain_csv(std::ostream& os, const FeedbackLaw& law) {
  os << "t,regime,row,col,theta\n";
  for (std::size_t node = 0; node < law.gain.size(); ++node) {
    const double t = law.grid.node(node);
    for (std::size_t r = 0; r < law.gain[node].size(); ++r) {
      const Matrix& g = law.gain[node][r];
      for (Eigen::Index i = 0; i < g.rows(); ++i) {
        for (Eigen::Index j = 0; j < g.cols(); ++j) {
          fmt::print(os, "{:.17g},{},{},{},{:.17g}\n", t, r, i, j, g(i, j));
        }
      }
    }
  }
}

}  // namespace jumplq
