#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "jumplq/feedback.hpp"
#include "jumplq/problem.hpp"
#include "jumplq/time_grid.hpp"

namespace jumplq {

struct JumpEvent {
  double time = 0.0;
  std::size_t mark = 0;
  std::size_t step = 0;  // Euler step whose interval (t_k, t_{k+1}] holds the event

  friend bool operator==(const JumpEvent&, const JumpEvent&) = default;
};

/// Randomness of one path: Brownian increments and marked jump arrivals. The
/// bundle does not depend on the control, so several controls can be
/// evaluated on identical noise.
struct NoiseBundle {
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
  std::size_t steps = 0;
  std::size_t d = 0;
  std::vector<double> brownian;  // [step * d + i], each ~ Normal(0, dt)
  std::vector<JumpEvent> jumps;  // strictly increasing times in (0, T]

  double increment(std::size_t step, std::size_t i) const { return brownian[step * d + i]; }
  friend bool operator==(const NoiseBundle&, const NoiseBundle&) = default;
};

/// Draws the bundle for (seed, path_index) from the Philox stream keyed by the
/// seed. Identical inputs give bit-identical bundles.
NoiseBundle sample_noise(const LqProblem& p, const TimeGrid& grid, std::uint64_t path_index,
                         std::uint64_t seed);

/// Same events, Brownian increments summed pairwise: the bundle of the grid
/// with half as many steps. Requires an even step count.
NoiseBundle coarsen(const NoiseBundle& noise);

struct RealizedEvent {
  double time = 0.0;
  std::size_t mark = 0;
  std::size_t regime_before = 0;
  std::size_t regime_after = 0;

  friend bool operator==(const RealizedEvent&, const RealizedEvent&) = default;
};

struct Path {
  TimeGrid grid;
  std::size_t start_node = 0;
  std::vector<Vector> X;  // X[k] for k = start_node..steps (index k - start_node)
  std::vector<Vector> u;  // per step from start_node
  std::vector<RealizedEvent> events;
  double cost = 0.0;

  friend bool operator==(const Path& a, const Path& b);
};

struct OpenLoop {
  std::vector<Vector> u;  // per step, m-vectors
};

struct Control;

/// base + eps * direction. A feedback base is first realized as an open-loop
/// control on the bundle being simulated.
struct PerturbedControl {
  std::shared_ptr<const Control> base;
  std::vector<Vector> direction;
  double eps = 0.0;
};

struct Control {
  std::variant<FeedbackLaw, OpenLoop, PerturbedControl> value;

  static Control feedback(FeedbackLaw law) { return {std::move(law)}; }
  static Control open_loop(std::vector<Vector> u) { return {OpenLoop{std::move(u)}}; }
  static Control perturbed(Control base, std::vector<Vector> direction, double eps);
  /// u = 0 on every step.
  static Control zero(const LqProblem& p, const TimeGrid& grid);
};

/// Where a simulation starts; defaults to (0, x0, r0) of the problem.
struct SimulationStart {
  std::size_t node = 0;
  Vector x;
  std::size_t regime = 0;
};

/// Euler-Maruyama on the compensated jump SDE with left-node coefficients:
///   X_{k+1} = X_k + (A X_k + B u_k) dt + sum_i (C_i X_k + D_i u_k) dW_i
///             + sum_{events in step} (E X_k + F u_k) - dt sum_j nu_j (E_j X_k + F_j u_k).
/// The regime is updated event by event. Throws NonFinite on overflow.
Path simulate(const LqProblem& p, const Control& ctrl, const NoiseBundle& noise,
              const TimeGrid& grid, const std::optional<SimulationStart>& start = std::nullopt);

/// Realized cost of one path without recording the trajectory.
double simulate_cost(const LqProblem& p, const Control& ctrl, const NoiseBundle& noise,
                     const TimeGrid& grid);

/// Records the controls the feedback law produces on this bundle.
OpenLoop realize_open_loop(const LqProblem& p, const FeedbackLaw& law, const NoiseBundle& noise,
                           const TimeGrid& grid);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t paths = 0;
};

/// Mean and standard error with a fixed-shape reduction.
McEstimate summarize(std::span<const double> samples);

McEstimate estimate_cost(const LqProblem& p, const Control& ctrl, const TimeGrid& grid,
                         std::size_t n_paths, std::uint64_t seed);

/// Per-path costs (index = path index) on bundles sample_noise(p, grid, i, seed).
std::vector<double> path_costs(const LqProblem& p, const Control& ctrl, const TimeGrid& grid,
                               std::size_t n_paths, std::uint64_t seed);

/// 2 [sum_k (<Q X_k, Y_k> + <N u_k, v_k>) dt + <M X_T, Y_T>] on one bundle,
/// where X runs from x0 under u and Y from 0 under v.
double pathwise_pairing(const LqProblem& p, const Control& u, std::span<const Vector> v,
                        const NoiseBundle& noise, const TimeGrid& grid);

/// Monte Carlo estimate of <J'(u), v>.
McEstimate gradient_pairing(const LqProblem& p, const Control& u, std::span<const Vector> v,
                            const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed);

struct RepresentationReport {
  McEstimate estimate;
  double oracle = 0.0;
  double z = 0.0;
};

/// Compares <K(t) x, x> of an uncontrolled linear solution with the Monte
/// Carlo cost-to-go of the uncontrolled state started at (t, x).
RepresentationReport lyapunov_representation_check(const LqProblem& p, const RiccatiSolution& sol,
                                                   double t, const Vector& x, std::size_t n_paths,
                                                   std::uint64_t seed, std::size_t regime = 0);

struct EstimateRow {
  std::string label;
  McEstimate estimate;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
};

/// CSV with header label,mean,stderr,paths,steps,seed.
void write_estimates_csv(std::ostream& os, std::span<const EstimateRow> rows);

}  // namespace jumplq
