#include "jumplq/problem.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <fmt/format.h>

#include "jumplq/errors.hpp"

namespace jumplq {

double total_intensity(const MarkSpace& marks) {
  return std::accumulate(marks.weights.begin(), marks.weights.end(), 0.0);
}

std::size_t SliceTable::interval_of(double t) const {
  // Left-endpoint convention: t on a breakpoint belongs to the interval it opens.
  const auto it = std::upper_bound(grid.begin(), grid.end(), t);
  const auto j = static_cast<std::size_t>(std::distance(grid.begin(), it));
  return std::clamp<std::size_t>(j, 1, slices.size()) - 1;
}

const CoefficientSlice& SliceTable::at(double t) const { return slices[interval_of(t)]; }

std::size_t LqProblem::regime_count() const noexcept {
  if (const auto* r = std::get_if<RegimeCoefficients>(&env)) return r->regimes.size();
  return 1;
}

std::size_t LqProblem::jump_target(std::size_t r, std::size_t k) const {
  if (const auto* rc = std::get_if<RegimeCoefficients>(&env)) return rc->jump_map[r][k];
  return r;
}

const SliceTable& LqProblem::table(std::size_t regime) const {
  if (const auto* rc = std::get_if<RegimeCoefficients>(&env)) return rc->regimes.at(regime);
  return std::get<DeterministicCoefficients>(env).table;
}

std::string ValidationReport::joined() const {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v;
  }
  return out;
}

namespace {

bool all_finite(const Matrix& a) { return a.allFinite(); }

void check_shape(std::vector<std::string>& out, const std::string& where, const char* name,
                 const Matrix& a, std::size_t rows, std::size_t cols) {
  if (static_cast<std::size_t>(a.rows()) != rows || static_cast<std::size_t>(a.cols()) != cols) {
    out.push_back(fmt::format("{}: {} has shape {}x{}, expected {}x{}", where, name, a.rows(),
                              a.cols(), rows, cols));
  } else if (!all_finite(a)) {
    out.push_back(fmt::format("{}: {} has non-finite entries", where, name));
  }
}

void check_slice(std::vector<std::string>& out, const LqProblem& p, const CoefficientSlice& s,
                 const std::string& where, bool regime_mode) {
  const std::size_t n = p.n, m = p.m, k = p.marks.size();
  check_shape(out, where, "A", s.A, n, n);
  check_shape(out, where, "B", s.B, n, m);
  if (s.C.size() != p.d || s.D.size() != p.d) {
    out.push_back(fmt::format("{}: expected {} diffusion matrices C and D", where, p.d));
  } else {
    for (std::size_t i = 0; i < p.d; ++i) {
      check_shape(out, where, fmt::format("C[{}]", i).c_str(), s.C[i], n, n);
      check_shape(out, where, fmt::format("D[{}]", i).c_str(), s.D[i], n, m);
    }
  }
  if (s.E.size() != k || s.F.size() != k) {
    out.push_back(fmt::format("{}: expected {} jump matrices E and F", where, k));
  } else {
    for (std::size_t j = 0; j < k; ++j) {
      check_shape(out, where, fmt::format("E[{}]", j).c_str(), s.E[j], n, n);
      check_shape(out, where, fmt::format("F[{}]", j).c_str(), s.F[j], n, m);
      if (regime_mode && s.F[j].size() > 0 && !s.F[j].isZero(0.0)) {
        out.push_back(fmt::format("{}: F must vanish in regime mode (mark {})", where, j));
      }
    }
  }
  if (static_cast<std::size_t>(s.Q.dim()) != n) {
    out.push_back(fmt::format("{}: Q has dimension {}, expected {}", where, s.Q.dim(), n));
  } else if (!all_finite(s.Q.matrix())) {
    out.push_back(fmt::format("{}: Q has non-finite entries", where));
  } else if (!is_psd(s.Q, 1e-10)) {
    out.push_back(fmt::format("{}: Q not PSD (min eig {:.3g})", where, min_eigenvalue(s.Q)));
  }
  if (static_cast<std::size_t>(s.N.dim()) != m) {
    out.push_back(fmt::format("{}: N has dimension {}, expected {}", where, s.N.dim(), m));
  } else if (!all_finite(s.N.matrix())) {
    out.push_back(fmt::format("{}: N has non-finite entries", where));
  } else if (const double lo = min_eigenvalue(s.N); !(lo >= p.delta)) {
    out.push_back(fmt::format("{}: N below delta floor (min eig {:.3g} < {:.3g})", where, lo,
                              p.delta));
  }
}

void check_table(std::vector<std::string>& out, const LqProblem& p, const SliceTable& t,
                 const std::string& where, bool regime_mode) {
  const auto& g = t.grid;
  if (g.size() < 2) {
    out.push_back(fmt::format("{}: grid needs at least two breakpoints", where));
    return;
  }
  if (g.front() != 0.0 || g.back() != p.T) {
    out.push_back(fmt::format("{}: grid must start at 0 and end at T", where));
  }
  if (std::adjacent_find(g.begin(), g.end(), std::greater_equal<>()) != g.end()) {
    out.push_back(fmt::format("{}: grid must be strictly increasing", where));
  }
  if (t.slices.size() + 1 != g.size()) {
    out.push_back(fmt::format("{}: {} slices for {} intervals", where, t.slices.size(),
                              g.size() - 1));
    return;
  }
  for (std::size_t j = 0; j < t.slices.size(); ++j) {
    check_slice(out, p, t.slices[j], fmt::format("{}slice {}", where.empty() ? "" : where + " ", j),
                regime_mode);
  }
}

}  // namespace

ValidationReport validate(const LqProblem& p) {
  ValidationReport report;
  auto& out = report.violations;
  if (p.n < 1 || p.m < 1) out.emplace_back("dimensions n and m must be positive");
  if (!(p.T > 0.0)) out.emplace_back("horizon T must be positive");
  if (!(p.delta > 0.0)) out.emplace_back("delta must be positive");
  if (static_cast<std::size_t>(p.x0.size()) != p.n) {
    out.push_back(fmt::format("x0 has length {}, expected {}", p.x0.size(), p.n));
  }
  if (static_cast<std::size_t>(p.M.dim()) != p.n) {
    out.push_back(fmt::format("M has dimension {}, expected {}", p.M.dim(), p.n));
  } else if (!is_psd(p.M, 1e-10)) {
    out.push_back(fmt::format("M not PSD (min eig {:.3g})", min_eigenvalue(p.M)));
  }
  if (p.marks.labels.size() != p.marks.weights.size()) {
    out.emplace_back("marks: labels and weights differ in length");
  }
  for (std::size_t k = 0; k < p.marks.weights.size(); ++k) {
    const double w = p.marks.weights[k];
    if (!(w > 0.0) || !std::isfinite(w)) {
      out.push_back(fmt::format("marks[{}]: weight must be positive and finite", k));
    }
  }
  if (!out.empty()) return report;

  if (const auto* det = std::get_if<DeterministicCoefficients>(&p.env)) {
    check_table(out, p, det->table, "", false);
    if (p.r0 != 0) out.emplace_back("r0 must be 0 for deterministic coefficients");
    return report;
  }
  const auto& rc = std::get<RegimeCoefficients>(p.env);
  const std::size_t R = rc.regimes.size();
  if (R == 0) {
    out.emplace_back("regime env needs at least one regime");
    return report;
  }
  for (std::size_t r = 0; r < R; ++r) {
    check_table(out, p, rc.regimes[r], fmt::format("regime {}", r), true);
    if (rc.regimes[r].grid != rc.regimes[0].grid) {
      out.push_back(fmt::format("regime {}: grid differs from regime 0", r));
    }
  }
  if (rc.jump_map.size() != R) {
    out.push_back(fmt::format("jump_map has {} rows, expected {}", rc.jump_map.size(), R));
  } else {
    for (std::size_t r = 0; r < R; ++r) {
      if (rc.jump_map[r].size() != p.marks.size()) {
        out.push_back(fmt::format("jump_map[{}] has {} entries, expected {}", r,
                                  rc.jump_map[r].size(), p.marks.size()));
        continue;
      }
      for (std::size_t k = 0; k < p.marks.size(); ++k) {
        if (rc.jump_map[r][k] >= R) {
          out.push_back(fmt::format("jump_map[{}][{}] = {} is not a regime", r, k,
                                    rc.jump_map[r][k]));
        }
      }
    }
  }
  if (p.r0 >= R) out.push_back(fmt::format("r0 = {} is not a regime", p.r0));
  return report;
}

const CoefficientSlice& slice_at(const LqProblem& p, double t, std::size_t regime) {
  if (!(t >= 0.0 && t <= p.T)) {
    throw OutOfHorizon(fmt::format("time {} outside [0, {}]", t, p.T));
  }
  if (p.is_regime()) {
    if (regime >= p.regime_count()) {
      throw std::out_of_range(fmt::format("regime {} out of range", regime));
    }
    return p.table(regime).at(t);
  }
  return p.table(0).at(t);
}

}  // namespace jumplq
