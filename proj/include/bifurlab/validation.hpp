#pragma once

// Numerical evidence for the constructions and verdicts: residual-order
// fits, escape-time probes and Lyapunov monotonicity along trajectories.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bifurlab/asymptotics.hpp"
#include "bifurlab/classifier.hpp"
#include "bifurlab/integrator.hpp"
#include "bifurlab/model.hpp"

namespace bifurlab {

struct SlopeFit {
  bool exact = false;     ///< residual at the rounding floor on most of the grid, nothing fitted
  double slope = 0.0;
  double intercept = 0.0;
  double threshold = 0.0; ///< -(order+1)/grid_den + tolerance
  bool passes = false;
  std::vector<double> times;
  std::vector<double> residuals;
};

/// Least-squares fit of log|residual| against log t. Throws
/// std::invalid_argument when t_grid spans fewer than three decades.
[[nodiscard]] SlopeFit check_order(const AsymptoticSolution& sol, const PerturbedSystem& sys,
                                   const std::vector<double>& t_grid, double tolerance = 0.2);

enum class EmpiricalVerdict {
  ConsistentStable,
  ConsistentUnstable,
  ConsistentMetastable,
  Inconclusive
};

[[nodiscard]] std::string to_string(EmpiricalVerdict v);

struct CellOutcome {
  bool stayed = false;
  std::optional<double> escape_time;
  std::string error;  ///< non-empty when the integration failed
};

struct ProbeReport {
  Branch branch;
  std::vector<double> offsets;
  std::vector<double> horizons;
  std::vector<std::vector<CellOutcome>> outcomes;  ///< [offset][horizon]
  EmpiricalVerdict empirical_verdict = EmpiricalVerdict::Inconclusive;
  std::optional<StabilityVerdict> theory_verdict;
};

struct ProbeOptions {
  DeviationNorm norm = DeviationNorm::Auto;
  /// Direction of the initial offset in the (xi, eta) plane; the offset
  /// size is measured with `norm`.
  double direction_angle = 0.0;
  /// When > t0, distances are measured from the particular solution
  /// obtained by integrating back from the series at this time.
  double reference_match_time = 1e3;
  /// Escape-time ratio separating "not growing" from "growing".
  double growth_factor = 10.0;
};

/// Initial state of a probe run: the branch point at cfg.t0 (refined as in
/// ProbeOptions) displaced by `offset`, measured in the probe norm.
[[nodiscard]] State offset_state(const PerturbedSystem& sys, const AsymptoticSolution& sol,
                                 const ReferencePath& path, double offset, double t0,
                                 const ProbeOptions& opt);

/// The probe run for one offset, sampled at `samples` log-spaced times up
/// to cfg.t_end.
[[nodiscard]] Trajectory probe_trajectory(const PerturbedSystem& sys,
                                          const AsymptoticSolution& sol, double offset,
                                          const IntegratorConfig& cfg, const ProbeOptions& opt,
                                          int samples);

/// Escape-time ladder. Offsets must be positive and strictly decreasing,
/// horizons strictly increasing and above cfg.t0.
[[nodiscard]] ProbeReport probe(const PerturbedSystem& sys, const AsymptoticSolution& sol,
                                const std::vector<double>& offsets,
                                const std::vector<double>& horizons, double radius,
                                const IntegratorConfig& cfg, const ProbeOptions& opt = {});

/// The verdict rules applied to a filled-in outcome table.
[[nodiscard]] EmpiricalVerdict empirical_verdict(const ProbeReport& report, double t0,
                                                 double growth_factor = 10.0);

/// True when the empirical verdict is the one the theory verdict predicts.
[[nodiscard]] bool agrees(EmpiricalVerdict e, Verdict v);

/// Slope of log(escape time) against log(1/offset) over the escaped cells
/// of the longest horizon; nullopt with fewer than two escapes.
[[nodiscard]] std::optional<double> escape_exponent(const ProbeReport& report);

class NotApplicable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MonotonicityOptions {
  double transient_fraction = 0.1;
  /// Samples farther than this from the branch (Auto norm) are outside the
  /// neighbourhood where the estimates hold.
  double neighbourhood = 0.2;
  /// Pairs whose Lyapunov values both lie below this magnitude are not
  /// resolved by the integration and are skipped.
  double resolution_floor = 1e-12;
  /// Overrides the sign read off the theory verdict (-1 decreasing, +1
  /// increasing).
  std::optional<int> expected_sign;
  /// When later than the first sample, the functions are centred on the
  /// particular solution integrated back from the series at this time, as
  /// in the probe. Otherwise on the truncated series, whose error near
  /// early times can swamp small deviations.
  double reference_match_time = 1e3;
};

struct MonotonicityResult {
  double fraction_violating = 0.0;
  int pairs_used = 0;
  int expected_sign = -1;
  [[nodiscard]] bool passes(double budget = 0.05) const { return fraction_violating < budget; }
};

/// Fraction of consecutive sample pairs whose Lyapunov difference has the
/// sign opposite to the one the theorem asserts for this branch. Throws
/// NotApplicable when the trajectory leaves the neighbourhood or the
/// verdict asserts no sign (metastable, undetermined).
[[nodiscard]] MonotonicityResult lyapunov_monotonicity(const PerturbedSystem& sys,
                                                       const AsymptoticSolution& sol,
                                                       const Trajectory& traj, LyapunovKind kind,
                                                       const MonotonicityOptions& opt = {});

}  // namespace bifurlab
