#include "jumplq/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "jumplq/errors.hpp"

namespace jumplq {

namespace {

Matrix jump_sum(const SymMat& K, std::span<const SymMat> H, std::size_t k) {
  return H.empty() ? K.matrix() : Matrix(K.matrix() + H[k].matrix());
}

}  // namespace

SymMat nhat(const CoefficientSlice& s, const MarkSpace& marks, const SymMat& K,
            std::span<const SymMat> H) {
  Matrix out = s.N.matrix();
  const Matrix& k = K.matrix();
  for (std::size_t i = 0; i < s.D.size(); ++i) {
    out.noalias() += s.D[i].transpose() * k * s.D[i];
  }
  for (std::size_t j = 0; j < marks.size(); ++j) {
    if (s.F[j].isZero(0.0)) continue;
    out.noalias() += marks.weights[j] * (s.F[j].transpose() * jump_sum(K, H, j) * s.F[j]);
  }
  return SymMat(out);
}

Matrix bhat(const CoefficientSlice& s, const MarkSpace& marks, const SymMat& K,
            std::span<const SymMat> H) {
  const Matrix& k = K.matrix();
  Matrix out = k * s.B;
  for (std::size_t i = 0; i < s.C.size(); ++i) {
    out.noalias() += s.C[i].transpose() * k * s.D[i];
  }
  for (std::size_t j = 0; j < marks.size(); ++j) {
    if (s.F[j].isZero(0.0)) continue;
    Matrix term = s.E[j].transpose() * jump_sum(K, H, j) * s.F[j];
    if (!H.empty()) term.noalias() += H[j].matrix() * s.F[j];
    out.noalias() += marks.weights[j] * term;
  }
  return out;
}

namespace {

/// K A + A' K + sum_i C_i' K C_i + sum_k nu_k [E' (K + H) E + H E + E' H]_k
/// with the given (possibly closed-loop) A, C, E.
Matrix linear_part(const Matrix& A, std::span<const Matrix> C, std::span<const Matrix> E,
                   const MarkSpace& marks, const SymMat& K, std::span<const SymMat> H) {
  const Matrix& k = K.matrix();
  Matrix ka = k * A;
  Matrix out = ka + ka.transpose();
  for (const Matrix& c : C) out.noalias() += c.transpose() * k * c;
  for (std::size_t j = 0; j < marks.size(); ++j) {
    const double nu = marks.weights[j];
    out.noalias() += nu * (E[j].transpose() * jump_sum(K, H, j) * E[j]);
    if (!H.empty()) {
      Matrix he = H[j].matrix() * E[j];
      out.noalias() += nu * (he + he.transpose());
    }
  }
  return out;
}

}  // namespace

SymMat generator_drift(const CoefficientSlice& s, const MarkSpace& marks, const SymMat& K,
                       std::span<const SymMat> H, double delta) {
  Matrix out = linear_part(s.A, s.C, s.E, marks, K, H);
  out += s.Q.matrix();
  const Matrix b = bhat(s, marks, K, H);
  const Matrix x = spd_solve(nhat(s, marks, K, H), b.transpose(), delta);
  out.noalias() -= b * x;
  return SymMat(out);
}

Matrix optimal_u(const CoefficientSlice& s, const MarkSpace& marks, const SymMat& K,
                 std::span<const SymMat> H, double delta) {
  return spd_solve(nhat(s, marks, K, H), bhat(s, marks, K, H).transpose(), delta);
}

SymMat lyapunov_drift(const CoefficientSlice& s, const MarkSpace& marks, const SymMat& K,
                      std::span<const SymMat> H, const Matrix& U) {
  const Matrix a = s.A - s.B * U;
  std::vector<Matrix> c(s.C.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = s.C[i] - s.D[i] * U;
  std::vector<Matrix> e(s.E.size());
  for (std::size_t j = 0; j < e.size(); ++j) e[j] = s.E[j] - s.F[j] * U;
  Matrix out = linear_part(a, c, e, marks, K, H);
  out += s.Q.matrix();
  out.noalias() += U.transpose() * s.N.matrix() * U;
  return SymMat(out);
}

namespace {

using Stack = std::vector<SymMat>;  // one K per regime

enum class Stage { kEnd, kMid, kStart };

std::vector<SymMat> jump_field(const LqProblem& p, const Stack& K, std::size_t r) {
  if (!p.is_regime()) return {};
  std::vector<SymMat> h;
  h.reserve(p.marks.size());
  for (std::size_t k = 0; k < p.marks.size(); ++k) h.push_back(K[p.jump_target(r, k)] - K[r]);
  return h;
}

void check_grid(const LqProblem& p, const TimeGrid& grid) {
  if (const auto report = validate(p); !report.ok()) throw InvalidProblem(report.joined());
  if (std::abs(grid.T - p.T) > 1e-12 * std::max(1.0, p.T)) {
    throw InvalidProblem(fmt::format("grid horizon {} differs from problem horizon {}", grid.T, p.T));
  }
  for (double b : p.table_grid()) {
    const double pos = b / grid.dt();
    if (std::abs(pos - std::round(pos)) > 1e-9 * std::max(1.0, pos)) {
      throw InvalidProblem(fmt::format("coefficient breakpoint {} is not a grid node", b));
    }
  }
}

/// Generic backward RK4 over the regime stack. `drift(r, slice, K, H, step, stage)`
/// returns minus the dK/dt contribution of regime r without the coupling term.
template <typename Drift>
std::vector<Stack> integrate_backward(const LqProblem& p, const TimeGrid& grid, Drift&& drift) {
  const std::size_t R = p.regime_count();
  const double h = grid.dt();
  std::vector<Stack> K(grid.nodes());
  K[grid.steps] = Stack(R, p.M);

  std::vector<const CoefficientSlice*> slices(R);
  auto rhs = [&](const Stack& y, std::size_t step, Stage stage) {
    Stack out;
    out.reserve(R);
    for (std::size_t r = 0; r < R; ++r) {
      const auto hr = jump_field(p, y, r);
      SymMat f = drift(r, *slices[r], y[r], std::span<const SymMat>(hr), step, stage);
      for (std::size_t k = 0; k < hr.size(); ++k) f += p.marks.weights[k] * hr[k];
      out.push_back(-1.0 * std::move(f));
    }
    return out;
  };
  auto axpy = [&](const Stack& y, double a, const Stack& dy) {
    Stack out;
    out.reserve(R);
    for (std::size_t r = 0; r < R; ++r) out.push_back(y[r] + a * dy[r]);
    return out;
  };

  for (std::size_t step = grid.steps; step-- > 0;) {
    const double t_mid = 0.5 * (grid.node(step) + grid.node(step + 1));
    for (std::size_t r = 0; r < R; ++r) slices[r] = &p.table(r).at(t_mid);
    const Stack& y = K[step + 1];
    try {
      const Stack k1 = rhs(y, step, Stage::kEnd);
      const Stack k2 = rhs(axpy(y, -0.5 * h, k1), step, Stage::kMid);
      const Stack k3 = rhs(axpy(y, -0.5 * h, k2), step, Stage::kMid);
      const Stack k4 = rhs(axpy(y, -h, k3), step, Stage::kStart);
      Stack next;
      next.reserve(R);
      for (std::size_t r = 0; r < R; ++r) {
        Matrix incr = k1[r].matrix() + 2.0 * k2[r].matrix() + 2.0 * k3[r].matrix() + k4[r].matrix();
        next.emplace_back(Matrix(y[r].matrix() - (h / 6.0) * incr));
      }
      for (std::size_t r = 0; r < R; ++r) {
        if (!next[r].matrix().allFinite()) throw NonFinite(step);
        const double lo = clamp_small_negative(next[r], kPsdClamp);
        if (!std::isfinite(lo) || lo < -kPsdClamp) throw PsdViolation(step, lo);
      }
      K[step] = std::move(next);
    } catch (const NotUniformlyPositive& e) {
      if (!std::isfinite(e.min_eig())) throw NonFinite(step);
      throw NotUniformlyPositive(e.min_eig(), fmt::format("step {}", step));
    }
  }
  return K;
}

RiccatiSolution assemble(const LqProblem& p, const TimeGrid& grid, std::vector<Stack> K,
                         std::string method) {
  const std::size_t R = p.regime_count();
  RiccatiSolution sol;
  sol.grid = grid;
  sol.diagnostics.method = std::move(method);
  sol.H.resize(grid.nodes());
  sol.diagnostics.min_eig_K.assign(grid.nodes(), std::vector<double>(R));
  sol.diagnostics.min_eig_Nhat.assign(grid.nodes(), std::vector<double>(R));
  for (std::size_t node = 0; node < grid.nodes(); ++node) {
    sol.H[node].resize(R);
    for (std::size_t r = 0; r < R; ++r) {
      auto hr = jump_field(p, K[node], r);
      if (hr.empty()) hr.assign(p.marks.size(), SymMat::zero(static_cast<Eigen::Index>(p.n)));
      const auto& s = slice_at(p, grid.node(node), r);
      sol.diagnostics.min_eig_K[node][r] = min_eigenvalue(K[node][r]);
      sol.diagnostics.min_eig_Nhat[node][r] = min_eigenvalue(nhat(s, p.marks, K[node][r], hr));
      sol.H[node][r] = std::move(hr);
    }
  }
  sol.K = std::move(K);
  return sol;
}

}  // namespace

RiccatiSolution solve_direct(const LqProblem& p, const TimeGrid& grid) {
  check_grid(p, grid);
  auto K = integrate_backward(
      p, grid,
      [&](std::size_t, const CoefficientSlice& s, const SymMat& k, std::span<const SymMat> h,
          std::size_t, Stage) { return generator_drift(s, p.marks, k, h, p.delta); });
  auto sol = assemble(p, grid, std::move(K), "direct-rk4");
  sol.diagnostics.iterations = 1;
  return sol;
}

RiccatiSolution solve_lyapunov(const LqProblem& p, const TimeGrid& grid, const StepGains* gains) {
  check_grid(p, grid);
  const Matrix zero = Matrix::Zero(static_cast<Eigen::Index>(p.m), static_cast<Eigen::Index>(p.n));
  if (gains != nullptr &&
      (gains->start.size() != grid.steps || gains->end.size() != grid.steps)) {
    throw std::invalid_argument("solve_lyapunov: gain table does not match the grid");
  }
  auto K = integrate_backward(
      p, grid,
      [&](std::size_t r, const CoefficientSlice& s, const SymMat& k, std::span<const SymMat> h,
          std::size_t step, Stage stage) {
        if (gains == nullptr) return lyapunov_drift(s, p.marks, k, h, zero);
        switch (stage) {
          case Stage::kEnd:
            return lyapunov_drift(s, p.marks, k, h, gains->end[step][r]);
          case Stage::kStart:
            return lyapunov_drift(s, p.marks, k, h, gains->start[step][r]);
          case Stage::kMid:
          default:
            return lyapunov_drift(s, p.marks, k, h,
                                  0.5 * (gains->start[step][r] + gains->end[step][r]));
        }
      });
  auto sol = assemble(p, grid, std::move(K), "lyapunov-rk4");
  sol.diagnostics.iterations = 1;
  return sol;
}

double sup_deviation(const std::vector<std::vector<SymMat>>& a,
                     const std::vector<std::vector<SymMat>>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("sup_deviation: node count mismatch");
  double worst = 0.0;
  for (std::size_t node = 0; node < a.size(); ++node) {
    for (std::size_t r = 0; r < a[node].size(); ++r) {
      worst = std::max(worst, frobenius_distance(a[node][r], b[node][r]));
    }
  }
  return worst;
}

double sup_deviation(const RiccatiSolution& a, const RiccatiSolution& b) {
  return sup_deviation(a.K, b.K);
}

QuasilinearizationResult solve_quasilinearization(const LqProblem& p, const TimeGrid& grid,
                                                  double tol, std::size_t max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("quasilinearization tolerance must be positive");
  check_grid(p, grid);
  const std::size_t R = p.regime_count();
  const auto n = static_cast<Eigen::Index>(p.n);

  // K_0 = 0, so the first frozen U is Uhat(0) = 0.
  std::vector<Stack> previous(grid.nodes(), Stack(R, SymMat::zero(n)));
  QuasilinearizationResult result;
  auto& trace = result.trace;
  double last_deviation = std::numeric_limits<double>::infinity();

  for (std::size_t j = 1; j <= max_iter; ++j) {
    StepGains gains;
    gains.start.assign(grid.steps, std::vector<Matrix>(R));
    gains.end.assign(grid.steps, std::vector<Matrix>(R));
    for (std::size_t step = 0; step < grid.steps; ++step) {
      const double t_mid = 0.5 * (grid.node(step) + grid.node(step + 1));
      for (std::size_t r = 0; r < R; ++r) {
        const auto& s = p.table(r).at(t_mid);
        const auto h0 = jump_field(p, previous[step], r);
        const auto h1 = jump_field(p, previous[step + 1], r);
        gains.start[step][r] = optimal_u(s, p.marks, previous[step][r], h0, p.delta);
        gains.end[step][r] = optimal_u(s, p.marks, previous[step + 1][r], h1, p.delta);
      }
    }
    RiccatiSolution next = solve_lyapunov(p, grid, &gains);

    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& row : next.diagnostics.min_eig_K) {
      for (double v : row) lowest = std::min(lowest, v);
    }
    trace.iterate_min_eig.push_back(lowest);

    if (j >= 2) {
      last_deviation = sup_deviation(previous, next.K);
      double certificate = std::numeric_limits<double>::infinity();
      for (std::size_t node = 0; node < grid.nodes(); ++node) {
        for (std::size_t r = 0; r < R; ++r) {
          certificate = std::min(certificate, min_eigenvalue(previous[node][r] - next.K[node][r]));
        }
      }
      trace.deviations.push_back(last_deviation);
      trace.certificates.push_back(certificate);
      if (certificate < -kPsdClamp) throw MonotonicityViolation(j - 1, certificate);
    }
    trace.iterates.push_back(next.K);
    previous = next.K;

    if (j >= 2 && last_deviation < tol) {
      trace.converged_iteration = j - 1;
      next.diagnostics.method = "quasilinearization";
      next.diagnostics.iterations = j;
      result.solution = std::move(next);
      return result;
    }
  }
  throw NoConvergence(max_iter, last_deviation);
}

void write_solution_csv(std::ostream& os, const RiccatiSolution& sol) {
  os << "t,regime,i,j,K_ij\n";
  for (std::size_t node = 0; node < sol.K.size(); ++node) {
    const double t = sol.grid.node(node);
    for (std::size_t r = 0; r < sol.K[node].size(); ++r) {
      const Matrix& k = sol.K[node][r].matrix();
      for (Eigen::Index i = 0; i < k.rows(); ++i) {
        for (Eigen::Index j = 0; j < k.cols(); ++j) {
          fmt::print(os, "{:.17g},{},{},{},{:.17g}\n", t, r, i, j, k(i, j));
        }
      }
    }
  }
}

void write_diagnostics_csv(std::ostream& os, const RiccatiSolution& sol) {
  os << "t,regime,min_eig_K,min_eig_Nhat\n";
  const auto& d = sol.diagnostics;
  for (std::size_t node = 0; node < d.min_eig_K.size(); ++node) {
    for (std::size_t r = 0; r < d.min_eig_K[node].size(); ++r) {
      fmt::print(os, "{:.17g},{},{:.17g},{:.17g}\n", sol.grid.node(node), r, d.min_eig_K[node][r],
                 d.min_eig_Nhat[node][r]);
    }
  }
}

}  // namespace jumplq
