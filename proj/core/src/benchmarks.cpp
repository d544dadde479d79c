#include "jumplq/benchmarks.hpp"

#include <charconv>

#include <fmt/format.h>

#include "jumplq/errors.hpp"
#include "jumplq/rng.hpp"

namespace jumplq {

namespace {

Matrix mat(Eigen::Index rows, Eigen::Index cols, std::initializer_list<double> row_major) {
  Matrix a(rows, cols);
  auto it = row_major.begin();
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = *it++;
  }
  return a;
}

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

CoefficientSlice zero_slice(std::size_t n, std::size_t m, std::size_t d, std::size_t marks) {
  const auto N = static_cast<Eigen::Index>(n), Mm = static_cast<Eigen::Index>(m);
  CoefficientSlice s;
  s.A = Matrix::Zero(N, N);
  s.B = Matrix::Zero(N, Mm);
  s.C.assign(d, Matrix::Zero(N, N));
  s.D.assign(d, Matrix::Zero(N, Mm));
  s.E.assign(marks, Matrix::Zero(N, N));
  s.F.assign(marks, Matrix::Zero(N, Mm));
  s.Q = SymMat::zero(N);
  s.N = SymMat::identity(Mm);
  return s;
}

MarkSpace mark_space(std::initializer_list<double> weights) {
  MarkSpace ms;
  std::size_t k = 0;
  for (double w : weights) {
    ms.labels.push_back(fmt::format("theta{}", ++k));
    ms.weights.push_back(w);
  }
  return ms;
}

LqProblem scalar_riccati() {
  // k' = k^2, k(1) = 1  =>  k(t) = 1 / (2 - t).
  LqProblem p;
  p.n = p.m = p.d = 1;
  p.T = 1.0;
  p.x0 = Vector::Constant(1, 1.0);
  CoefficientSlice s = zero_slice(1, 1, 1, 0);
  s.B = scalar(1.0);
  p.env = DeterministicCoefficients{SliceTable{{0.0, 1.0}, {s}}};
  p.M = SymMat::identity(1);
  return p;
}

LqProblem lyapunov_only() {
  LqProblem p;
  p.n = p.m = p.d = 1;
  p.T = 1.0;
  p.x0 = Vector::Constant(1, 1.0);
  p.marks = mark_space({1.0});
  CoefficientSlice s = zero_slice(1, 1, 1, 1);
  s.A = scalar(1.0);
  s.C[0] = scalar(0.3);
  s.E[0] = scalar(0.5);
  s.Q = SymMat::identity(1);
  p.env = DeterministicCoefficients{SliceTable{{0.0, 1.0}, {s}}};
  p.M = SymMat::identity(1);
  return p;
}

CoefficientSlice oscillator_slice() {
  CoefficientSlice s = zero_slice(2, 1, 1, 1);
  s.A = mat(2, 2, {0.0, 1.0, -1.0, -0.2});
  s.B = mat(2, 1, {0.0, 1.0});
  s.C[0] = mat(2, 2, {0.2, 0.0, 0.0, 0.1});
  s.D[0] = mat(2, 1, {0.0, 0.3});
  s.E[0] = mat(2, 2, {-0.2, 0.0, 0.1, 0.15});
  s.Q = SymMat::identity(2);
  s.N = SymMat::identity(1);
  return s;
}

LqProblem two_regime_symmetric() {
  LqProblem p;
  p.n = 2;
  p.m = 1;
  p.d = 1;
  p.T = 1.0;
  p.x0 = Vector::Zero(2);
  p.x0 << 1.0, 0.0;
  p.marks = mark_space({0.8});
  const CoefficientSlice s = oscillator_slice();
  p.env = RegimeCoefficients{{SliceTable{{0.0, 1.0}, {s}}, SliceTable{{0.0, 1.0}, {s}}},
                             {{1}, {0}}};
  p.M = SymMat::identity(2);
  return p;
}

LqProblem two_regime() {
  LqProblem p;
  p.n = 2;
  p.m = 1;
  p.d = 1;
  p.T = 1.0;
  p.x0 = Vector::Zero(2);
  p.x0 << 1.0, -0.5;
  // Mark 1 switches regime, mark 2 only hits the state.
  p.marks = mark_space({1.0, 0.5});
  CoefficientSlice calm = zero_slice(2, 1, 1, 2);
  calm.A = mat(2, 2, {0.0, 1.0, -1.0, -0.3});
  calm.B = mat(2, 1, {0.0, 1.0});
  calm.C[0] = mat(2, 2, {0.1, 0.0, 0.0, 0.1});
  calm.D[0] = mat(2, 1, {0.0, 0.2});
  calm.E[0] = mat(2, 2, {0.1, 0.0, 0.0, 0.1});
  calm.E[1] = mat(2, 2, {-0.2, 0.1, 0.0, -0.2});
  calm.Q = SymMat::identity(2);
  calm.N = SymMat::identity(1);

  CoefficientSlice rough = calm;
  rough.A = mat(2, 2, {0.3, 1.0, -1.5, 0.1});
  rough.C[0] = mat(2, 2, {0.4, 0.1, 0.0, 0.3});
  rough.D[0] = mat(2, 1, {0.1, 0.4});
  rough.E[0] = mat(2, 2, {-0.3, 0.0, 0.2, 0.25});
  rough.E[1] = mat(2, 2, {0.3, 0.0, 0.0, -0.1});
  rough.Q = SymMat(mat(2, 2, {2.0, 0.5, 0.5, 1.0}));
  rough.N = SymMat::identity(1);
  p.env = RegimeCoefficients{{SliceTable{{0.0, 1.0}, {calm}}, SliceTable{{0.0, 1.0}, {rough}}},
                             {{1, 0}, {0, 1}}};
  p.M = SymMat(mat(2, 2, {1.0, 0.2, 0.2, 0.5}));
  return p;
}

LqProblem coupled_2d() {
  LqProblem p;
  p.n = 2;
  p.m = 1;
  p.d = 2;
  p.T = 1.0;
  p.x0 = Vector::Zero(2);
  p.x0 << 1.0, -0.5;
  p.marks = mark_space({0.7, 0.5});
  CoefficientSlice s = zero_slice(2, 1, 2, 2);
  s.A = mat(2, 2, {0.0, 1.0, -2.0, -0.5});
  s.B = mat(2, 1, {0.0, 1.0});
  s.C[0] = mat(2, 2, {0.3, 0.0, 0.0, 0.15});
  s.D[0] = mat(2, 1, {0.1, 0.2});
  s.C[1] = mat(2, 2, {0.0, 0.2, 0.1, 0.0});
  s.E[0] = mat(2, 2, {0.3, 0.0, 0.1, -0.2});
  s.F[0] = mat(2, 1, {0.2, 0.0});
  s.E[1] = mat(2, 2, {-0.25, 0.0, 0.0, -0.25});
  s.Q = SymMat::diag({1.0, 0.5});
  s.N = SymMat(scalar(0.5));
  CoefficientSlice late = s;
  late.A = mat(2, 2, {0.0, 1.0, -1.0, -0.2});
  late.Q = SymMat::diag({2.0, 0.5});
  p.env = DeterministicCoefficients{SliceTable{{0.0, 0.5, 1.0}, {s, late}}};
  p.M = SymMat::diag({1.0, 1.0});
  return p;
}

LqProblem zero_dynamics() {
  LqProblem p;
  p.n = 2;
  p.m = 1;
  p.d = 0;
  p.T = 1.0;
  p.x0 = Vector::Zero(2);
  p.x0 << 1.0, 2.0;
  p.env = DeterministicCoefficients{SliceTable{{0.0, 1.0}, {zero_slice(2, 1, 0, 0)}}};
  p.M = SymMat::identity(2);
  return p;
}

/// Uniform draws in [lo, hi) from a fixed stream, in call order.
class Draws {
 public:
  explicit Draws(std::uint64_t seed) : stream_(seed, 0xB3C4u) {}
  double uniform(double lo, double hi) {
    const auto u = stream_.uniforms(counter_++, 0, 7);
    return lo + (hi - lo) * u[0];
  }
  Matrix matrix(Eigen::Index rows, Eigen::Index cols, double scale) {
    Matrix a(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = uniform(-scale, scale);
    }
    return a;
  }
  SymMat gram(Eigen::Index n, double shift) {
    const Matrix g = matrix(n, n, 1.0);
    return SymMat(g * g.transpose() / static_cast<double>(n) +
                  shift * Matrix::Identity(n, n));
  }

 private:
  CounterStream stream_;
  std::uint32_t counter_ = 0;
};

CoefficientSlice random_slice(Draws& draw, const RandomPsdParams& params) {
  const auto n = static_cast<Eigen::Index>(params.n), m = static_cast<Eigen::Index>(params.m);
  CoefficientSlice s = zero_slice(params.n, params.m, params.d, params.marks);
  s.A = draw.matrix(n, n, 0.5);
  s.B = draw.matrix(n, m, 1.0);
  for (std::size_t i = 0; i < params.d; ++i) {
    s.C[i] = draw.matrix(n, n, 0.3);
    s.D[i] = draw.matrix(n, m, 0.3);
  }
  for (std::size_t k = 0; k < params.marks; ++k) {
    s.E[k] = draw.matrix(n, n, 0.3);
    if (params.regimes == 1) s.F[k] = draw.matrix(n, m, 0.3);
  }
  s.Q = draw.gram(n, 0.0);
  s.N = draw.gram(m, 0.5);
  return s;
}

LqProblem parse_random(std::string_view name) {
  // random-psd(seed,n,m,d,K[,R])
  const auto open = name.find('(');
  if (name.substr(0, open) != "random-psd" || open == std::string_view::npos || name.back() != ')') {
    throw UnknownBenchmark(fmt::format("unknown benchmark '{}'", name));
  }
  std::vector<std::uint64_t> args;
  std::string_view rest = name.substr(open + 1, name.size() - open - 2);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view tok = rest.substr(0, comma);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw UnknownBenchmark(fmt::format("bad argument '{}' in '{}'", tok, name));
    }
    args.push_back(v);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (args.size() != 5 && args.size() != 6) {
    throw UnknownBenchmark(fmt::format("'{}' needs (seed,n,m,d,K[,R])", name));
  }
  return random_psd_problem({args[0], args[1], args[2], args[3], args[4],
                             args.size() == 6 ? args[5] : 1});
}

}  // namespace

LqProblem random_psd_problem(const RandomPsdParams& params) {
  if (params.n < 1 || params.m < 1 || params.regimes < 1) {
    throw UnknownBenchmark("random-psd needs n, m, R >= 1");
  }
  Draws draw(params.seed);
  LqProblem p;
  p.n = params.n;
  p.m = params.m;
  p.d = params.d;
  p.T = 1.0;
  for (std::size_t k = 0; k < params.marks; ++k) {
    p.marks.labels.push_back(fmt::format("theta{}", k + 1));
    p.marks.weights.push_back(draw.uniform(0.5, 1.5));
  }
  const std::vector<double> breakpoints{0.0, 0.5, 1.0};
  std::vector<SliceTable> tables;
  for (std::size_t r = 0; r < params.regimes; ++r) {
    SliceTable t{breakpoints, {}};
    for (std::size_t j = 0; j + 1 < breakpoints.size(); ++j) t.slices.push_back(random_slice(draw, params));
    tables.push_back(std::move(t));
  }
  const auto n = static_cast<Eigen::Index>(params.n);
  p.M = draw.gram(n, 0.0);
  p.x0 = draw.matrix(n, 1, 1.0);
  if (params.regimes == 1) {
    p.env = DeterministicCoefficients{std::move(tables.front())};
  } else {
    std::vector<std::vector<std::size_t>> jump_map(params.regimes);
    for (std::size_t r = 0; r < params.regimes; ++r) {
      for (std::size_t k = 0; k < params.marks; ++k) jump_map[r].push_back((r + 1 + k) % params.regimes);
    }
    p.env = RegimeCoefficients{std::move(tables), std::move(jump_map)};
  }
  return p;
}

LqProblem canned_problem(std::string_view name) {
  if (name == "scalar-riccati") return scalar_riccati();
  if (name == "lyapunov-only") return lyapunov_only();
  if (name == "two-regime-symmetric") return two_regime_symmetric();
  if (name == "two-regime") return two_regime();
  if (name == "coupled-2d") return coupled_2d();
  if (name == "zero-dynamics") return zero_dynamics();
  if (name.starts_with("random-psd")) return parse_random(name);
  throw UnknownBenchmark(fmt::format("unknown benchmark '{}'", name));
}

std::vector<std::string> benchmark_names() {
  return {"scalar-riccati", "lyapunov-only", "two-regime-symmetric",
          "two-regime",     "coupled-2d",    "zero-dynamics"};
}

}  // namespace jumplq
