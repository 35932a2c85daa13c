#include "bifurlab/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bifurlab {

namespace {

// Size of the individual terms entering the residual, so that residuals at
// the extended-precision rounding level can be recognised as zero.
double residual_term_scale(const AsymptoticSolution& sol, const PerturbedSystem& sys, double t) {
  const State z = eval_asym(sol, t);
  const double ax = std::abs(z[0]), ay = std::abs(z[1]);
  auto abs1 = [](const Poly1& p, double x) {
    double s = 0;
    for (const auto& [i, c] : p.terms()) s += std::abs(c) * std::pow(x, i);
    return s;
  };
  auto abs2 = [](const Poly2& p, double x, double y) {
    double s = 0;
    for (const auto& [k, c] : p.terms()) s += std::abs(c) * std::pow(x, k.first) * std::pow(y, k.second);
    return s;
  };
  double scale = ay + (ax * ax + sys.lambda()) * abs1(sys.w(), ax);
  for (int k = 1; k <= sys.k_pert(); ++k) {
    const double wk = std::pow(t, -static_cast<double>(k) / sys.q());
    scale += wk * (abs2(sys.F(k), ax, ay) + abs2(sys.G(k), ax, ay));
  }
  return scale;
}

}  // namespace

SlopeFit check_order(const AsymptoticSolution& sol, const PerturbedSystem& sys,
                     const std::vector<double>& t_grid, double tolerance) {
  if (t_grid.size() < 2) throw std::invalid_argument("check_order: need at least two times");
  const auto [lo, hi] = std::minmax_element(t_grid.begin(), t_grid.end());
  if (!(*lo > 0) || *hi / *lo < 1e3 * (1 - 1e-12)) {
    throw std::invalid_argument("check_order: t_grid must span at least three decades");
  }
  SlopeFit fit;
  fit.threshold = -static_cast<double>(sol.order + 1) / sol.grid_den + tolerance;
  std::vector<double> lx, ly;
  for (double t : t_grid) {
    const auto r = residual(sol, sys, t);
    double mag = std::hypot(r[0], r[1]);
    const double floor =
        256 * static_cast<double>(std::numeric_limits<Real>::epsilon()) * residual_term_scale(sol, sys, t);
    if (mag <= floor) mag = 0;
    fit.times.push_back(t);
    fit.residuals.push_back(mag);
    if (mag > 0) {
      lx.push_back(std::log(t));
      ly.push_back(std::log(mag));
    }
  }
  // Mostly at the rounding floor: the series terminates.
  if (2 * lx.size() < t_grid.size()) {
    fit.exact = true;
    fit.passes = true;
    fit.slope = -std::numeric_limits<double>::infinity();
    return fit;
  }
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.passes = fit.slope <= fit.threshold;
  return fit;
}

std::string to_string(EmpiricalVerdict v) {
  switch (v) {
    case EmpiricalVerdict::ConsistentStable: return "consistent_stable";
    case EmpiricalVerdict::ConsistentUnstable: return "consistent_unstable";
    case EmpiricalVerdict::ConsistentMetastable: return "consistent_metastable";
    case EmpiricalVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

EmpiricalVerdict empirical_verdict(const ProbeReport& r, double t0, double growth_factor) {
  if (r.horizons.empty() || r.horizons.back() <= t0) return EmpiricalVerdict::Inconclusive;
  std::vector<const std::vector<CellOutcome>*> rows;
  for (const auto& row : r.outcomes) {
    const bool failed =
        std::any_of(row.begin(), row.end(), [](const CellOutcome& c) { return !c.error.empty(); });
    if (!failed && !row.empty()) rows.push_back(&row);
  }
  if (rows.size() < 2) return EmpiricalVerdict::Inconclusive;

  bool all_stayed = true;
  for (const auto* row : rows) {
    for (const auto& c : *row) all_stayed = all_stayed && c.stayed;
  }
  if (all_stayed) return EmpiricalVerdict::ConsistentStable;

  // Escape times at the longest horizon, +inf where the offset stayed.
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> tau;
  for (const auto* row : rows) tau.push_back(row->back().escape_time.value_or(inf));
  const double first = tau.front();
  if (!std::isfinite(first)) return EmpiricalVerdict::Inconclusive;

  const bool all_escaped = std::all_of(tau.begin(), tau.end(), [](double v) { return std::isfinite(v); });
  const double worst = *std::max_element(tau.begin(), tau.end());
  if (all_escaped && worst < growth_factor * first) return EmpiricalVerdict::ConsistentUnstable;

  const bool monotone = std::is_sorted(tau.begin(), tau.end());
  if (monotone && tau.back() >= growth_factor * first) {
    return EmpiricalVerdict::ConsistentMetastable;
  }
  return EmpiricalVerdict::Inconclusive;
}

bool agrees(EmpiricalVerdict e, Verdict v) {
  switch (v) {
    case Verdict::Stable:
    case Verdict::AsymptoticallyStable: return e == EmpiricalVerdict::ConsistentStable;
    case Verdict::Unstable: return e == EmpiricalVerdict::ConsistentUnstable;
    case Verdict::Metastable: return e == EmpiricalVerdict::ConsistentMetastable;
    case Verdict::Undetermined: return false;
  }
  return false;
}

State offset_state(const PerturbedSystem& sys, const AsymptoticSolution& sol,
                   const ReferencePath& path, double offset, double t0, const ProbeOptions& opt) {
  const DeviationMeter meter(sys, sol, opt.norm);
  const State ref = path(t0);
  const State dir{std::cos(opt.direction_angle), std::sin(opt.direction_angle)};
  // The norm is homogeneous of degree one in the displacement.
  const double unit = meter(State{ref[0] + dir[0], ref[1] + dir[1]}, ref, t0);
  const double s = offset / unit;
  return {ref[0] + s * dir[0], ref[1] + s * dir[1]};
}

Trajectory probe_trajectory(const PerturbedSystem& sys, const AsymptoticSolution& sol,
                            double offset, const IntegratorConfig& cfg, const ProbeOptions& opt,
                            int samples) {
  const ReferencePath path(sys, sol, cfg.t0, std::max(cfg.t0, opt.reference_match_time), cfg);
  IntegratorConfig c = cfg;
  c.sample_times = log_spaced(cfg.t0, cfg.t_end, samples);
  return integrate(sys, offset_state(sys, sol, path, offset, cfg.t0, opt), c);
}

ProbeReport probe(const PerturbedSystem& sys, const AsymptoticSolution& sol,
                  const std::vector<double>& offsets, const std::vector<double>& horizons,
                  double radius, const IntegratorConfig& cfg, const ProbeOptions& opt) {
  if (offsets.empty() || horizons.empty()) {
    throw std::invalid_argument("probe: offsets and horizons must be nonempty");
  }
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    if (!(offsets[i] > 0) || (i > 0 && !(offsets[i] < offsets[i - 1]))) {
      throw std::invalid_argument("probe: offsets must be positive and decreasing");
    }
  }
  for (std::size_t i = 1; i < horizons.size(); ++i) {
    if (!(horizons[i] > horizons[i - 1])) {
      throw std::invalid_argument("probe: horizons must be increasing");
    }
  }
  if (!(radius > 0)) throw std::invalid_argument("probe: radius must be positive");

  ProbeReport rep;
  rep.branch = sol.branch;
  rep.offsets = offsets;
  rep.horizons = horizons;
  rep.outcomes.assign(offsets.size(), std::vector<CellOutcome>(horizons.size()));
  try {
    rep.theory_verdict = classify(sys, sol.branch);
  } catch (const ClassificationUnavailable&) {
  }

  const double t0 = cfg.t0;
  const double t_max = horizons.back();
  if (!(t_max > t0)) {
    // Nothing to integrate: every cell trivially stays.
    for (auto& row : rep.outcomes) {
      for (auto& c : row) c.stayed = true;
    }
    rep.empirical_verdict = EmpiricalVerdict::Inconclusive;
    return rep;
  }

  std::optional<ReferencePath> path;
  std::string path_error;
  try {
    path.emplace(sys, sol, t0, std::max(t0, opt.reference_match_time), cfg);
  } catch (const std::exception& e) {
    path_error = e.what();
  }

  parallel_for(offsets.size(), [&](std::size_t i) {
    auto& row = rep.outcomes[i];
    if (!path) {
      for (auto& c : row) c.error = path_error;
      return;
    }
    const State ic = offset_state(sys, sol, *path, offsets[i], t0, opt);
    IntegratorConfig c = cfg;
    c.t_end = t_max;
    c.sample_times.reset();
    try {
      const auto tau = escape_time(sys, sol, *path, ic, radius, c, opt.norm);
      for (std::size_t j = 0; j < horizons.size(); ++j) {
        if (tau && *tau <= horizons[j]) {
          row[j].escape_time = *tau;
        } else {
          row[j].stayed = true;
        }
      }
    } catch (const std::exception& e) {
      for (auto& cell : row) cell.error = e.what();
    }
  });
  rep.empirical_verdict = empirical_verdict(rep, t0, opt.growth_factor);
  return rep;
}

std::optional<double> escape_exponent(const ProbeReport& r) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < r.offsets.size(); ++i) {
    const auto& c = r.outcomes[i].back();
    if (c.escape_time) {
      lx.push_back(std::log(1.0 / r.offsets[i]));
      ly.push_back(std::log(*c.escape_time));
    }
  }
  if (lx.size() < 2) return std::nullopt;
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0) return std::nullopt;
  return (n * sxy - sx * sy) / den;
}

MonotonicityResult lyapunov_monotonicity(const PerturbedSystem& sys,
                                         const AsymptoticSolution& sol, const Trajectory& traj,
                                         LyapunovKind kind, const MonotonicityOptions& opt) {
  if (traj.times.size() != traj.states.size()) {
    throw std::invalid_argument("lyapunov_monotonicity: malformed trajectory");
  }
  MonotonicityResult res;
  if (opt.expected_sign) {
    res.expected_sign = *opt.expected_sign > 0 ? 1 : -1;
  } else {
    if (!is_centre_type(sol.branch)) {
      throw NotApplicable("no Lyapunov sign is asserted for saddle-type branches");
    }
    StabilityVerdict v = classify(sys, sol.branch);
    switch (v.verdict) {
      case Verdict::Stable:
      case Verdict::AsymptoticallyStable: res.expected_sign = -1; break;
      case Verdict::Unstable: res.expected_sign = 1; break;
      default:
        throw NotApplicable("verdict " + to_string(v.verdict) + " asserts no Lyapunov sign");
    }
  }
  const LyapunovFunction U(sys, sol, kind);
  const DeviationMeter meter(sys, sol, DeviationNorm::Auto);
  const std::size_t n = traj.times.size();
  std::optional<ReferencePath> path;
  if (n > 0 && opt.reference_match_time > traj.times.front()) {
    path.emplace(sys, sol, traj.times.front(), opt.reference_match_time);
  }
  const std::size_t skip = static_cast<std::size_t>(std::floor(opt.transient_fraction * n));
  std::vector<double> vals;
  for (std::size_t i = skip; i < n; ++i) {
    const double t = traj.times[i];
    const State ref = path ? (*path)(t) : eval_asym(sol, t);
    if (meter(traj.states[i], ref, t) > opt.neighbourhood) {
      throw NotApplicable("trajectory leaves the neighbourhood at t = " + std::to_string(t));
    }
    vals.push_back(U(traj.states[i], ref, t));
  }
  int used = 0, bad = 0;
  for (std::size_t i = 1; i < vals.size(); ++i) {
    if (std::max(std::abs(vals[i]), std::abs(vals[i - 1])) < opt.resolution_floor) continue;
    ++used;
    const double d = vals[i] - vals[i - 1];
    if (d * res.expected_sign < 0) ++bad;
  }
  res.pairs_used = used;
  res.fraction_violating = used > 0 ? static_cast<double>(bad) / used : 0.0;
  return res;
}

}  // namespace bifurlab
