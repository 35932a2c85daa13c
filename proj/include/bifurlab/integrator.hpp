#pragma once

// Dormand-Prince 5(4) integration of the perturbed system with PI step
// control and the pair's quartic dense output.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bifurlab/asymptotics.hpp"
#include "bifurlab/classifier.hpp"
#include "bifurlab/model.hpp"

namespace bifurlab {

struct IntegratorConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double t0 = 1.0;
  double t_end = 1e3;
  long max_steps = 20'000'000;
  std::optional<double> initial_step;
  /// Stops the run (Termination::EscapeEvent) once |(x, y)| exceeds this.
  std::optional<double> escape_radius;
  /// Output times; when absent every accepted step is recorded.
  std::optional<std::vector<double>> sample_times;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
};

enum class Termination { TEnd, EscapeEvent, StepFailure };

[[nodiscard]] std::string to_string(Termination t);

struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  long accepted_steps = 0;
  long rejected_steps = 0;
  Termination terminated_by = Termination::TEnd;
  std::string message;  ///< failure diagnostics, empty on success
  double last_time = 0.0;
};

/// One accepted step with its continuous extension.
class DenseStep {
 public:
  double t_prev = 0.0;
  double t_new = 0.0;
  State y_prev{};
  State y_new{};

  /// Interpolated state for t in [t_prev, t_new].
  [[nodiscard]] State operator()(double t) const;

 private:
  friend class DormandPrince45;
  std::array<State, 5> rcont_{};
};

/// Called after every accepted step; returning true stops the run with
/// Termination::EscapeEvent at `stop_time` (set by the observer, defaults
/// to the step end).
struct StepControl {
  double stop_time = 0.0;
};
using StepObserver = std::function<bool(const DenseStep&, StepControl&)>;

[[nodiscard]] Trajectory integrate(const PerturbedSystem& sys, const State& ic,
                                   const IntegratorConfig& cfg, const StepObserver& observer = {});

/// `count` log-spaced times covering [t0, t_end] inclusive.
[[nodiscard]] std::vector<double> log_spaced(double t0, double t_end, int count);

struct EscapeEvent {
  double radius = 0.2;
  std::optional<double> crossing_time;
};

/// First time the deviation from `reference` (measured with `norm`)
/// exceeds `radius`, refined by bisection on the dense output to 1e-6
/// relative accuracy. Throws std::runtime_error on integration failure
/// before any crossing.
[[nodiscard]] std::optional<double> escape_time(const PerturbedSystem& sys,
                                                const AsymptoticSolution& reference,
                                                const State& ic, double radius,
                                                const IntegratorConfig& cfg,
                                                DeviationNorm norm = DeviationNorm::Auto);

/// The particular solution as a numerical trajectory: integrated backward
/// from the series value at t_match down to t_start, and the series itself
/// beyond t_match. Near t_start the truncated series can be far from the
/// solution it approximates; this path is not.
class ReferencePath {
 public:
  /// Throws std::runtime_error if the backward integration fails.
  ReferencePath(const PerturbedSystem& sys, const AsymptoticSolution& sol, double t_start,
                double t_match, const IntegratorConfig& cfg = {});
  [[nodiscard]] State operator()(double t) const;
  [[nodiscard]] double t_start() const { return t_start_; }
  [[nodiscard]] double t_match() const { return t_match_; }

 private:
  const AsymptoticSolution* sol_;
  double t_start_;
  double t_match_;
  std::vector<DenseStep> steps_;  ///< ascending in time
};

/// As above, with distances measured from `path` instead of the raw series.
[[nodiscard]] std::optional<double> escape_time(const PerturbedSystem& sys,
                                                const AsymptoticSolution& reference,
                                                const ReferencePath& path, const State& ic,
                                                double radius, const IntegratorConfig& cfg,
                                                DeviationNorm norm = DeviationNorm::Auto);

/// Independent integrate() calls, possibly concurrent (BIFURLAB_THREADS caps
/// the worker count). Output order follows `ics`; a failing member is
/// recorded in its Trajectory instead of aborting the batch.
[[nodiscard]] std::vector<Trajectory> ensemble(const PerturbedSystem& sys,
                                               const std::vector<State>& ics,
                                               const IntegratorConfig& cfg);

/// Worker count from BIFURLAB_THREADS, defaulting to hardware concurrency.
[[nodiscard]] unsigned worker_count();

/// Runs fn(i) for i in [0, count) on up to worker_count() threads.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace bifurlab
