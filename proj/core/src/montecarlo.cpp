#include "jumplq/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "jumplq/errors.hpp"
#include "jumplq/parallel.hpp"
#include "jumplq/rng.hpp"

namespace jumplq {

namespace {

constexpr std::uint32_t kBrownianTag = 0;
constexpr std::uint32_t kJumpTag = 1;

}  // namespace

NoiseBundle sample_noise(const LqProblem& p, const TimeGrid& grid, std::uint64_t path_index,
                         std::uint64_t seed) {
  NoiseBundle nb;
  nb.seed = seed;
  nb.path_index = path_index;
  nb.steps = grid.steps;
  nb.d = p.d;
  const CounterStream stream(seed, static_cast<std::uint32_t>(path_index));
  const double sqrt_dt = std::sqrt(grid.dt());
  nb.brownian.resize(grid.steps * p.d);
  for (std::size_t k = 0; k < grid.steps; ++k) {
    for (std::size_t i = 0; i < p.d; ++i) {
      nb.brownian[k * p.d + i] =
          sqrt_dt * stream.normal(static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(i),
                                  kBrownianTag);
    }
  }

  const double lambda = total_intensity(p.marks);
  if (lambda <= 0.0) return nb;
  std::vector<double> cumulative(p.marks.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < p.marks.size(); ++k) cumulative[k] = (acc += p.marks.weights[k]);

  double t = 0.0;
  for (std::uint32_t event = 0;; ++event) {
    const auto [u_time, u_mark] = stream.uniforms(event, 0, kJumpTag);
    t += -std::log(u_time) / lambda;
    if (t > grid.T) break;
    const double target = u_mark * lambda;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    const auto mark = std::min<std::size_t>(std::distance(cumulative.begin(), it),
                                            p.marks.size() - 1);
    const auto step = static_cast<std::size_t>(std::clamp<double>(
        std::ceil(t / grid.dt()) - 1.0, 0.0, static_cast<double>(grid.steps - 1)));
    nb.jumps.push_back({t, mark, step});
  }
  return nb;
}

NoiseBundle coarsen(const NoiseBundle& noise) {
  if (noise.steps % 2 != 0) throw std::invalid_argument("coarsen: odd step count");
  NoiseBundle out = noise;
  out.steps = noise.steps / 2;
  out.brownian.assign(out.steps * noise.d, 0.0);
  for (std::size_t k = 0; k < out.steps; ++k) {
    for (std::size_t i = 0; i < noise.d; ++i) {
      out.brownian[k * noise.d + i] = noise.increment(2 * k, i) + noise.increment(2 * k + 1, i);
    }
  }
  for (auto& e : out.jumps) e.step /= 2;
  return out;
}

bool operator==(const Path& a, const Path& b) {
  auto same = [](const std::vector<Vector>& x, const std::vector<Vector>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i].size() != y[i].size() || x[i] != y[i]) return false;
    }
    return true;
  };
  return a.grid == b.grid && a.start_node == b.start_node && same(a.X, b.X) && same(a.u, b.u) &&
         a.events == b.events && a.cost == b.cost;
}

Control Control::perturbed(Control base, std::vector<Vector> direction, double eps) {
  return {PerturbedControl{std::make_shared<const Control>(std::move(base)), std::move(direction),
                           eps}};
}

Control Control::zero(const LqProblem& p, const TimeGrid& grid) {
  return open_loop(std::vector<Vector>(grid.steps, Vector::Zero(static_cast<Eigen::Index>(p.m))));
}

namespace {

/// Slice data pre-scaled for the Euler step.
struct StepCoefficients {
  Matrix drift_x;  // (A - sum_j nu_j E_j) dt
  Matrix drift_u;  // (B - sum_j nu_j F_j) dt
  const CoefficientSlice* slice = nullptr;
  bool has_control_jumps = false;
};

/// Coefficient lookup per (step, regime), built once per estimator call.
class SimulationPlan {
 public:
  SimulationPlan(const LqProblem& p, const TimeGrid& grid) : p_(p), grid_(grid) {
    if (const auto report = validate(p); !report.ok()) throw InvalidProblem(report.joined());
    const std::size_t R = p.regime_count();
    std::map<const CoefficientSlice*, std::size_t> index;
    lookup_.resize(grid.steps * R);
    const double dt = grid.dt();
    for (std::size_t k = 0; k < grid.steps; ++k) {
      for (std::size_t r = 0; r < R; ++r) {
        const CoefficientSlice* s = &slice_at(p, grid.node(k), r);
        auto [it, inserted] = index.try_emplace(s, coeffs_.size());
        if (inserted) {
          StepCoefficients c;
          c.slice = s;
          Matrix ebar = Matrix::Zero(s->A.rows(), s->A.cols());
          Matrix fbar = Matrix::Zero(s->B.rows(), s->B.cols());
          for (std::size_t j = 0; j < p.marks.size(); ++j) {
            ebar += p.marks.weights[j] * s->E[j];
            fbar += p.marks.weights[j] * s->F[j];
            c.has_control_jumps = c.has_control_jumps || !s->F[j].isZero(0.0);
          }
          c.drift_x = (s->A - ebar) * dt;
          c.drift_u = (s->B - fbar) * dt;
          coeffs_.push_back(std::move(c));
        }
        lookup_[k * R + r] = it->second;
      }
    }
  }

  const LqProblem& problem() const { return p_; }
  const TimeGrid& grid() const { return grid_; }
  const StepCoefficients& at(std::size_t step, std::size_t regime) const {
    return coeffs_[lookup_[step * p_.regime_count() + regime]];
  }

 private:
  const LqProblem& p_;
  TimeGrid grid_;
  std::vector<StepCoefficients> coeffs_;
  std::vector<std::size_t> lookup_;
};

// y += a * x for small dense column-major matrices.
inline void gemv_add(const Matrix& a, const double* x, double* y, double scale = 1.0) {
  const Eigen::Index rows = a.rows(), cols = a.cols();
  const double* col = a.data();
  for (Eigen::Index j = 0; j < cols; ++j, col += rows) {
    const double xj = scale * x[j];
    for (Eigen::Index i = 0; i < rows; ++i) y[i] += col[i] * xj;
  }
}

inline double quad(const Matrix& a, const double* x) {
  const Eigen::Index n = a.rows();
  double s = 0.0;
  const double* col = a.data();
  for (Eigen::Index j = 0; j < n; ++j, col += n) {
    double cj = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) cj += col[i] * x[i];
    s += cj * x[j];
  }
  return s;
}

/// Source of u_k: either a feedback law or a fixed per-step sequence.
struct ControlSource {
  const FeedbackLaw* law = nullptr;
  const std::vector<Vector>* open = nullptr;
};

/// One Euler path. Returns the realized cost.
double run_path(const SimulationPlan& plan, const ControlSource& ctrl, const NoiseBundle& noise,
                std::size_t start_node, const Vector& x0, std::size_t r0, Path* record) {
  const LqProblem& p = plan.problem();
  const TimeGrid& grid = plan.grid();
  const auto n = static_cast<Eigen::Index>(p.n);
  const auto m = static_cast<Eigen::Index>(p.m);
  if (noise.steps != grid.steps || noise.d != p.d) {
    throw std::invalid_argument("noise bundle does not match the grid");
  }
  if (ctrl.open != nullptr && ctrl.open->size() != grid.steps) {
    throw std::invalid_argument("open-loop control does not match the grid");
  }
  if (ctrl.law != nullptr && !(ctrl.law->grid == grid)) {
    throw std::invalid_argument("feedback law does not match the grid");
  }
  const double dt = grid.dt();
  Vector x = x0;
  Vector u(m), dx(n);
  std::size_t r = r0;
  double cost = 0.0;

  if (record != nullptr) {
    record->grid = grid;
    record->start_node = start_node;
    record->X.assign(1, x);
    record->u.clear();
    record->events.clear();
  }
  auto event = std::lower_bound(
      noise.jumps.begin(), noise.jumps.end(), start_node,
      [](const JumpEvent& e, std::size_t step) { return e.step < step; });

  for (std::size_t k = start_node; k < grid.steps; ++k) {
    const StepCoefficients& c = plan.at(k, r);
    const CoefficientSlice& s = *c.slice;
    if (ctrl.law != nullptr) {
      u.setZero();
      gemv_add(ctrl.law->gain[k][r], x.data(), u.data());
    } else if (ctrl.open != nullptr) {
      u = (*ctrl.open)[k];
    } else {
      u.setZero();
    }
    cost += (quad(s.Q.matrix(), x.data()) + quad(s.N.matrix(), u.data())) * dt;

    dx.setZero();
    gemv_add(c.drift_x, x.data(), dx.data());
    gemv_add(c.drift_u, u.data(), dx.data());
    for (std::size_t i = 0; i < p.d; ++i) {
      const double dw = noise.increment(k, i);
      gemv_add(s.C[i], x.data(), dx.data(), dw);
      gemv_add(s.D[i], u.data(), dx.data(), dw);
    }
    for (; event != noise.jumps.end() && event->step == k; ++event) {
      const CoefficientSlice& se = *plan.at(k, r).slice;
      gemv_add(se.E[event->mark], x.data(), dx.data());
      if (plan.at(k, r).has_control_jumps) gemv_add(se.F[event->mark], u.data(), dx.data());
      const std::size_t after = p.jump_target(r, event->mark);
      if (record != nullptr) record->events.push_back({event->time, event->mark, r, after});
      r = after;
    }
    x += dx;
    if (!x.allFinite()) throw NonFinite(k);
    if (record != nullptr) {
      record->X.push_back(x);
      record->u.push_back(u);
    }
  }
  cost += p.M.quadratic_form(x);
  if (record != nullptr) record->cost = cost;
  return cost;
}

/// Open-loop sequence for this bundle, or a feedback source.
struct ResolvedControl {
  ControlSource source;
  std::vector<Vector> storage;
};

ResolvedControl resolve(const SimulationPlan& plan, const Control& ctrl, const NoiseBundle& noise,
                        std::size_t start_node, const Vector& x0, std::size_t r0) {
  ResolvedControl out;
  if (const auto* law = std::get_if<FeedbackLaw>(&ctrl.value)) {
    out.source.law = law;
    return out;
  }
  if (const auto* open = std::get_if<OpenLoop>(&ctrl.value)) {
    out.source.open = &open->u;
    return out;
  }
  const auto& pert = std::get<PerturbedControl>(ctrl.value);
  if (pert.base == nullptr) throw std::invalid_argument("perturbed control without base");
  ResolvedControl base = resolve(plan, *pert.base, noise, start_node, x0, r0);
  if (base.source.law != nullptr) {
    Path path;
    run_path(plan, base.source, noise, start_node, x0, r0, &path);
    base.storage.assign(plan.grid().steps,
                        Vector::Zero(static_cast<Eigen::Index>(plan.problem().m)));
    std::copy(path.u.begin(), path.u.end(), base.storage.begin() + start_node);
  } else if (base.storage.empty()) {
    base.storage = *base.source.open;
  }
  if (pert.direction.size() != base.storage.size()) {
    throw std::invalid_argument("perturbation direction does not match the grid");
  }
  for (std::size_t k = 0; k < base.storage.size(); ++k) {
    base.storage[k] += pert.eps * pert.direction[k];
  }
  out.storage = std::move(base.storage);
  out.source.open = &out.storage;
  return out;
}

SimulationStart default_start(const LqProblem& p) { return {0, p.x0, p.r0}; }

}  // namespace

Path simulate(const LqProblem& p, const Control& ctrl, const NoiseBundle& noise,
              const TimeGrid& grid, const std::optional<SimulationStart>& start) {
  const SimulationPlan plan(p, grid);
  const SimulationStart s = start.value_or(default_start(p));
  const ResolvedControl rc = resolve(plan, ctrl, noise, s.node, s.x, s.regime);
  Path path;
  run_path(plan, rc.source, noise, s.node, s.x, s.regime, &path);
  return path;
}

double simulate_cost(const LqProblem& p, const Control& ctrl, const NoiseBundle& noise,
                     const TimeGrid& grid) {
  const SimulationPlan plan(p, grid);
  const ResolvedControl rc = resolve(plan, ctrl, noise, 0, p.x0, p.r0);
  return run_path(plan, rc.source, noise, 0, p.x0, p.r0, nullptr);
}

OpenLoop realize_open_loop(const LqProblem& p, const FeedbackLaw& law, const NoiseBundle& noise,
                           const TimeGrid& grid) {
  const Path path = simulate(p, Control::feedback(law), noise, grid);
  return OpenLoop{path.u};
}

McEstimate summarize(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw std::invalid_argument("summarize: need at least two samples");
  // Shift by the first sample so that constant data has exactly zero spread.
  const double shift = samples[0];
  std::vector<double> work(n);
  for (std::size_t i = 0; i < n; ++i) work[i] = samples[i] - shift;
  const double mean_shifted = pairwise_sum(work) / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dev = work[i] - mean_shifted;
    work[i] = dev * dev;
  }
  const double var = pairwise_sum(work) / static_cast<double>(n - 1);
  return {shift + mean_shifted, std::sqrt(var / static_cast<double>(n)), n};
}

std::vector<double> path_costs(const LqProblem& p, const Control& ctrl, const TimeGrid& grid,
                               std::size_t n_paths, std::uint64_t seed) {
  const SimulationPlan plan(p, grid);
  std::vector<double> costs(n_paths);
  parallel_for(n_paths, worker_count(), [&](std::size_t i) {
    const NoiseBundle noise = sample_noise(p, grid, i, seed);
    const ResolvedControl rc = resolve(plan, ctrl, noise, 0, p.x0, p.r0);
    costs[i] = run_path(plan, rc.source, noise, 0, p.x0, p.r0, nullptr);
  });
  return costs;
}

McEstimate estimate_cost(const LqProblem& p, const Control& ctrl, const TimeGrid& grid,
                         std::size_t n_paths, std::uint64_t seed) {
  if (n_paths < 2) throw std::invalid_argument("estimate_cost: need at least two paths");
  return summarize(path_costs(p, ctrl, grid, n_paths, seed));
}

namespace {

double pairing_on_plan(const SimulationPlan& plan, const Control& u, std::span<const Vector> v,
                       const NoiseBundle& noise) {
  const LqProblem& p = plan.problem();
  const TimeGrid& grid = plan.grid();
  if (v.size() != grid.steps) throw std::invalid_argument("direction does not match the grid");
  const ResolvedControl rc = resolve(plan, u, noise, 0, p.x0, p.r0);
  Path base, response;
  run_path(plan, rc.source, noise, 0, p.x0, p.r0, &base);
  const std::vector<Vector> dir(v.begin(), v.end());
  ControlSource vs;
  vs.open = &dir;
  run_path(plan, vs, noise, 0, Vector::Zero(static_cast<Eigen::Index>(p.n)), p.r0, &response);

  // Regimes are control independent, so replaying the events gives the
  // regime seen by each step of both trajectories.
  double running = 0.0;
  std::size_t r = p.r0;
  auto event = base.events.begin();
  auto jump = noise.jumps.begin();
  for (std::size_t k = 0; k < grid.steps; ++k) {
    const CoefficientSlice& s = *plan.at(k, r).slice;
    running += base.X[k].dot(s.Q.matrix() * response.X[k]) + base.u[k].dot(s.N.matrix() * dir[k]);
    for (; jump != noise.jumps.end() && jump->step == k; ++jump, ++event) r = event->regime_after;
  }
  const std::size_t last = grid.steps;
  return 2.0 * (running * grid.dt() + base.X[last].dot(p.M.matrix() * response.X[last]));
}

}  // namespace

double pathwise_pairing(const LqProblem& p, const Control& u, std::span<const Vector> v,
                        const NoiseBundle& noise, const TimeGrid& grid) {
  const SimulationPlan plan(p, grid);
  return pairing_on_plan(plan, u, v, noise);
}

McEstimate gradient_pairing(const LqProblem& p, const Control& u, std::span<const Vector> v,
                            const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed) {
  if (n_paths < 2) throw std::invalid_argument("gradient_pairing: need at least two paths");
  const SimulationPlan plan(p, grid);
  std::vector<double> samples(n_paths);
  parallel_for(n_paths, worker_count(), [&](std::size_t i) {
    samples[i] = pairing_on_plan(plan, u, v, sample_noise(p, grid, i, seed));
  });
  return summarize(samples);
}

RepresentationReport lyapunov_representation_check(const LqProblem& p, const RiccatiSolution& sol,
                                                   double t, const Vector& x, std::size_t n_paths,
                                                   std::uint64_t seed, std::size_t regime) {
  if (n_paths < 2) throw std::invalid_argument("representation check: need at least two paths");
  const TimeGrid& grid = sol.grid;
  const double pos = t / grid.dt();
  const auto node = static_cast<std::size_t>(std::llround(pos));
  if (std::abs(pos - static_cast<double>(node)) > 1e-9 * std::max(1.0, pos) || node > grid.steps) {
    throw OutOfHorizon(fmt::format("start time {} is not a grid node", t));
  }
  const SimulationPlan plan(p, grid);
  const std::vector<Vector> zero(grid.steps, Vector::Zero(static_cast<Eigen::Index>(p.m)));
  ControlSource source;
  source.open = &zero;
  std::vector<double> costs(n_paths);
  parallel_for(n_paths, worker_count(), [&](std::size_t i) {
    costs[i] = run_path(plan, source, sample_noise(p, grid, i, seed), node, x, regime, nullptr);
  });
  RepresentationReport report;
  report.estimate = summarize(costs);
  report.oracle = sol.at(node, regime).quadratic_form(x);
  const double diff = report.estimate.mean - report.oracle;
  report.z = report.estimate.std_error > 0.0 ? diff / report.estimate.std_error
                                             : (diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff));
  return report;
}

void write_estimates_csv(std::ostream& os, std::span<const EstimateRow> rows) {
  os << "label,mean,stderr,paths,steps,seed\n";
  for (const auto& row : rows) {
    fmt::print(os, "{},{:.17g},{:.17g},{},{},{}\n", row.label, row.estimate.mean,
               row.estimate.std_error, row.estimate.paths, row.steps, row.seed);
  }
}

}  // namespace jumplq
