#include "bifurlab/integrator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace bifurlab {

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0)) throw std::invalid_argument("rel_tol must be positive");
  if (!(abs_tol > 0)) throw std::invalid_argument("abs_tol must be positive");
  if (!(t0 > 0)) throw std::invalid_argument("t0 must be positive");
  if (!(t_end > 0)) throw std::invalid_argument("t_end must be positive");
  if (t_end == t0) throw std::invalid_argument("t_end must differ from t0");
  if (max_steps <= 0) throw std::invalid_argument("max_steps must be positive");
  if (escape_radius && !(*escape_radius > 0)) {
    throw std::invalid_argument("escape_radius must be positive");
  }
  if (initial_step && !(*initial_step > 0)) {
    throw std::invalid_argument("initial_step must be positive");
  }
  if (sample_times) {
    const auto& s = *sample_times;
    const bool fwd = t_end > t0;
    if (fwd ? !std::is_sorted(s.begin(), s.end()) : !std::is_sorted(s.rbegin(), s.rend())) {
      throw std::invalid_argument("sample_times must be ordered in the integration direction");
    }
    const double lo = std::min(t0, t_end), hi = std::max(t0, t_end);
    for (double v : s) {
      if (v < lo || v > hi) throw std::invalid_argument("sample_times must lie between t0 and t_end");
    }
  }
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::TEnd: return "TEnd";
    case Termination::EscapeEvent: return "EscapeEvent";
    case Termination::StepFailure: return "StepFailure";
  }
  return "?";
}

State DenseStep::operator()(double t) const {
  const double h = t_new - t_prev;
  if (h == 0.0) return y_new;
  const double th = (t - t_prev) / h;
  const double th1 = 1.0 - th;
  State out{};
  for (std::size_t i = 0; i < 2; ++i) {
    out[i] = rcont_[0][i] +
             th * (rcont_[1][i] +
                   th1 * (rcont_[2][i] + th * (rcont_[3][i] + th1 * rcont_[4][i])));
  }
  return out;
}

std::vector<double> log_spaced(double t0, double t_end, int count) {
  if (!(t0 > 0) || !(t_end >= t0)) throw std::invalid_argument("log_spaced: need 0 < t0 <= t_end");
  if (count < 1) throw std::invalid_argument("log_spaced: count must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = t0;
    return out;
  }
  const double a = std::log(t0);
  const double b = std::log(t_end);
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (count - 1));
  out.front() = t0;
  out.back() = t_end;
  return out;
}

// Dormand-Prince 5(4) in the formulation of Hairer's dopri5.
class DormandPrince45 {
 public:
  DormandPrince45(const PerturbedSystem& sys, const IntegratorConfig& cfg)
      : sys_(sys), cfg_(cfg) {}

  Trajectory run(const State& ic, const StepObserver& observer);

 private:
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                          a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                          d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                          d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

  State f(double t, const State& y) const { return sys_.rhs(y, t); }

  double sk(double a, double b) const {
    return cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(a), std::abs(b));
  }

  double initial_step(double t, const State& y, const State& f0, double hmax, double dir) const;

  const PerturbedSystem& sys_;
  const IntegratorConfig& cfg_;
};

double DormandPrince45::initial_step(double t, const State& y, const State& f0, double hmax,
                                     double dir) const {
  double dnf = 0, dny = 0;
  for (std::size_t i = 0; i < 2; ++i) {
    const double s = cfg_.abs_tol + cfg_.rel_tol * std::abs(y[i]);
    dnf += (f0[i] / s) * (f0[i] / s);
    dny += (y[i] / s) * (y[i] / s);
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
  h = std::min(h, hmax);
  State y1{y[0] + dir * h * f0[0], y[1] + dir * h * f0[1]};
  State f1 = f(t + dir * h, y1);
  double der2 = 0;
  for (std::size_t i = 0; i < 2; ++i) {
    const double s = cfg_.abs_tol + cfg_.rel_tol * std::abs(y[i]);
    der2 += ((f1[i] - f0[i]) / s) * ((f1[i] - f0[i]) / s);
  }
  der2 = std::sqrt(der2) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3)
                                   : std::pow(0.01 / der12, 1.0 / 5);
  return std::min({100 * std::abs(h), h1, hmax});
}

Trajectory DormandPrince45::run(const State& ic, const StepObserver& observer) {
  cfg_.validate();
  Trajectory out;
  double t = cfg_.t0;
  const double t_end = cfg_.t_end;
  State y = ic;
  out.last_time = t;
  const double dir = t_end > t ? 1.0 : -1.0;

  const std::vector<double>* samples = cfg_.sample_times ? &*cfg_.sample_times : nullptr;
  std::size_t next_sample = 0;
  auto record = [&](double ts, const State& ys) {
    out.times.push_back(ts);
    out.states.push_back(ys);
  };
  if (samples) {
    while (next_sample < samples->size() && dir * ((*samples)[next_sample] - t) <= 0) {
      record((*samples)[next_sample], y);
      ++next_sample;
    }
  } else {
    record(t, y);
  }

  auto fail = [&](const std::string& msg) {
    out.terminated_by = Termination::StepFailure;
    out.message = msg;
    out.last_time = t;
    return out;
  };

  if (!std::isfinite(y[0]) || !std::isfinite(y[1])) return fail("non-finite initial state");

  const double hmax = std::abs(t_end - t);
  State k1 = f(t, y);
  double h =
      cfg_.initial_step ? std::min(*cfg_.initial_step, hmax) : initial_step(t, y, k1, hmax, dir);

  constexpr double beta = 0.04;
  constexpr double expo1 = 0.2 - beta * 0.75;
  constexpr double safe = 0.9;
  constexpr double facc1 = 1.0 / 0.2;
  constexpr double facc2 = 1.0 / 10.0;
  double facold = 1e-4;
  bool last_rejected = false;
  long steps = 0;

  while (dir * (t_end - t) > 0) {
    if (steps >= cfg_.max_steps) return fail("max_steps exceeded at t = " + std::to_string(t));
    if (h < 1e-14 * std::abs(t)) return fail("step size underflow at t = " + std::to_string(t));
    bool last = false;
    if (dir * (t + dir * 1.01 * h - t_end) >= 0) {
      h = std::abs(t_end - t);
      last = true;
    }
    ++steps;
    const double hs = dir * h;

    State y2, y3, y4, y5, y6, y7;
    for (std::size_t i = 0; i < 2; ++i) y2[i] = y[i] + hs * a21 * k1[i];
    State k2 = f(t + c2 * hs, y2);
    for (std::size_t i = 0; i < 2; ++i) y3[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
    State k3 = f(t + c3 * hs, y3);
    for (std::size_t i = 0; i < 2; ++i) {
      y4[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    }
    State k4 = f(t + c4 * hs, y4);
    for (std::size_t i = 0; i < 2; ++i) {
      y5[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    }
    State k5 = f(t + c5 * hs, y5);
    for (std::size_t i = 0; i < 2; ++i) {
      y6[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    }
    const double t_new = t + hs;
    State k6 = f(t_new, y6);
    for (std::size_t i = 0; i < 2; ++i) {
      y7[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    }
    State k7 = f(t_new, y7);

    double err = 0;
    for (std::size_t i = 0; i < 2; ++i) {
      const double e =
          hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double s = sk(y[i], y7[i]);
      err += (e / s) * (e / s);
    }
    err = std::sqrt(err / 2);

    if (!std::isfinite(err) || !std::isfinite(y7[0]) || !std::isfinite(y7[1])) {
      ++out.rejected_steps;
      h *= 0.1;
      last_rejected = true;
      continue;
    }

    const double fac11 = std::pow(err, expo1);
    if (err <= 1.0) {
      double fac = fac11 / std::pow(facold, beta);
      fac = std::max(facc2, std::min(facc1, fac / safe));
      double h_new = h / fac;
      facold = std::max(err, 1e-4);
      ++out.accepted_steps;

      DenseStep ds;
      ds.t_prev = t;
      ds.t_new = t_new;
      ds.y_prev = y;
      ds.y_new = y7;
      for (std::size_t i = 0; i < 2; ++i) {
        const double ydiff = y7[i] - y[i];
        const double bspl = hs * k1[i] - ydiff;
        ds.rcont_[0][i] = y[i];
        ds.rcont_[1][i] = ydiff;
        ds.rcont_[2][i] = bspl;
        ds.rcont_[3][i] = ydiff - hs * k7[i] - bspl;
        ds.rcont_[4][i] =
            hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }

      bool stop = false;
      StepControl ctl{t_new};
      if (observer) stop = observer(ds, ctl);
      if (!stop && cfg_.escape_radius && std::hypot(y7[0], y7[1]) > *cfg_.escape_radius) {
        stop = true;
        ctl.stop_time = t_new;
      }
      const double t_stop = stop ? std::clamp(ctl.stop_time, std::min(t, t_new), std::max(t, t_new)) : t_new;

      if (samples) {
        while (next_sample < samples->size() && dir * ((*samples)[next_sample] - t_stop) <= 0) {
          const double ts = (*samples)[next_sample];
          record(ts, ts == t_new ? y7 : ds(ts));
          ++next_sample;
        }
      } else if (!stop) {
        record(t_new, y7);
      }

      if (stop) {
        if (!samples) record(t_stop, t_stop == t_new ? y7 : ds(t_stop));
        out.terminated_by = Termination::EscapeEvent;
        out.last_time = t_stop;
        return out;
      }

      k1 = k7;
      y = y7;
      t = last ? t_end : t_new;
      out.last_time = t;
      if (last_rejected) h_new = std::min(h_new, h);
      last_rejected = false;
      h = std::min(h_new, hmax);
    } else {
      h = h / std::min(facc1, fac11 / safe);
      ++out.rejected_steps;
      last_rejected = true;
    }
  }
  out.terminated_by = Termination::TEnd;
  out.last_time = t_end;
  return out;
}

Trajectory integrate(const PerturbedSystem& sys, const State& ic, const IntegratorConfig& cfg,
                     const StepObserver& observer) {
  DormandPrince45 dp(sys, cfg);
  return dp.run(ic, observer);
}

ReferencePath::ReferencePath(const PerturbedSystem& sys, const AsymptoticSolution& sol,
                             double t_start, double t_match, const IntegratorConfig& cfg)
    : sol_(&sol), t_start_(t_start), t_match_(t_match) {
  if (!(t_start > 0) || !(t_match >= t_start)) {
    throw std::invalid_argument("ReferencePath: need 0 < t_start <= t_match");
  }
  if (t_match == t_start) return;
  IntegratorConfig c = cfg;
  c.t0 = t_match;
  c.t_end = t_start;
  c.sample_times = std::vector<double>{};
  c.initial_step.reset();
  StepObserver keep = [&](const DenseStep& ds, StepControl&) {
    steps_.push_back(ds);
    return false;
  };
  Trajectory tr = integrate(sys, eval_asym(sol, t_match), c, keep);
  if (tr.terminated_by != Termination::TEnd) {
    throw std::runtime_error("ReferencePath: backward integration failed: " + tr.message);
  }
  std::reverse(steps_.begin(), steps_.end());
}

State ReferencePath::operator()(double t) const {
  if (t >= t_match_ || steps_.empty()) return eval_asym(*sol_, t);
  if (t < t_start_) throw DomainError("ReferencePath: t below t_start");
  // steps_ run backward in time individually: t_new < t_prev.
  auto it = std::lower_bound(steps_.begin(), steps_.end(), t,
                             [](const DenseStep& d, double v) { return d.t_prev < v; });
  if (it == steps_.end()) it = std::prev(steps_.end());
  return (*it)(t);
}

namespace {

std::optional<double> escape_impl(const PerturbedSystem& sys, const DeviationMeter& meter,
                                  const std::function<State(double)>& ref, const State& ic,
                                  double radius, const IntegratorConfig& cfg) {
  if (!(radius > 0)) throw std::invalid_argument("escape radius must be positive");
  if (!(cfg.t_end > cfg.t0)) throw std::invalid_argument("escape_time integrates forward only");
  auto dist = [&](const State& s, double t) { return meter(s, ref(t), t); };
  if (dist(ic, cfg.t0) > radius) return cfg.t0;
  IntegratorConfig c = cfg;
  c.sample_times = std::vector<double>{};  // record nothing
  std::optional<double> crossing;
  StepObserver obs = [&](const DenseStep& ds, StepControl& ctl) {
    if (!(dist(ds.y_new, ds.t_new) > radius)) return false;
    double lo = ds.t_prev;
    double hi = ds.t_new;
    while (hi - lo > 1e-6 * hi) {
      const double mid = 0.5 * (lo + hi);
      if (dist(ds(mid), mid) > radius) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    crossing = hi;
    ctl.stop_time = hi;
    return true;
  };
  Trajectory tr = integrate(sys, ic, c, obs);
  if (tr.terminated_by == Termination::StepFailure) {
    throw std::runtime_error("escape_time: integration failed: " + tr.message);
  }
  return crossing;
}

}  // namespace

std::optional<double> escape_time(const PerturbedSystem& sys, const AsymptoticSolution& reference,
                                  const State& ic, double radius, const IntegratorConfig& cfg,
                                  DeviationNorm norm) {
  const DeviationMeter meter(sys, reference, norm);
  return escape_impl(
      sys, meter, [&](double t) { return eval_asym(reference, t); }, ic, radius, cfg);
}

std::optional<double> escape_time(const PerturbedSystem& sys, const AsymptoticSolution& reference,
                                  const ReferencePath& path, const State& ic, double radius,
                                  const IntegratorConfig& cfg, DeviationNorm norm) {
  const DeviationMeter meter(sys, reference, norm);
  return escape_impl(sys, meter, [&](double t) { return path(t); }, ic, radius, cfg);
}

unsigned worker_count() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("BIFURLAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
  }
  return hw;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t nthreads = std::min<std::size_t>(worker_count(), count);
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex mtx;
  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mtx);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<Trajectory> ensemble(const PerturbedSystem& sys, const std::vector<State>& ics,
                                 const IntegratorConfig& cfg) {
  cfg.validate();
  std::vector<Trajectory> out(ics.size());
  parallel_for(ics.size(), [&](std::size_t i) {
    try {
      out[i] = integrate(sys, ics[i], cfg);
    } catch (const std::exception& e) {
      out[i].terminated_by = Termination::StepFailure;
      out[i].message = e.what();
      out[i].last_time = cfg.t0;
    }
  });
  return out;
}

}  // namespace bifurlab
