#include "bifurlab/classifier.hpp"

#include <cmath>

namespace bifurlab {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Unstable: return "Unstable";
    case Verdict::Stable: return "Stable";
    case Verdict::AsymptoticallyStable: return "AsymptoticallyStable";
    case Verdict::Metastable: return "Metastable";
    case Verdict::Undetermined: return "Undetermined";
  }
  return "?";
}

std::string to_string(LyapunovKind k) {
  switch (k) {
    case LyapunovKind::U1: return "U1";
    case LyapunovKind::U2: return "U2";
    case LyapunovKind::U3: return "U3";
    case LyapunovKind::W2Rescaled: return "W2Rescaled";
    case LyapunovKind::W3Rescaled: return "W3Rescaled";
  }
  return "?";
}

LyapunovKind natural_lyapunov_kind(Branch b) {
  switch (b) {
    case Branch::SigmaPlus:
    case Branch::SigmaMinus: return LyapunovKind::U1;
    case Branch::MuPlus:
    case Branch::MuMinus: return LyapunovKind::U2;
    case Branch::NuPlus:
    case Branch::NuMinus: return LyapunovKind::U3;
  }
  return LyapunovKind::U1;
}

EigenPair linearize(const PerturbedSystem& sys, const AsymptoticSolution& sol, double t) {
  if (!(t > 0)) throw DomainError("linearize: t must be positive");
  const State z = eval_asym(sol, t);
  double fx = 0, fy = 0, gx = 0, gy = 0;
  for (int k = 1; k <= sys.k_pert(); ++k) {
    const double wgt = std::pow(t, -static_cast<double>(k) / sys.q());
    fx += wgt * sys.F(k).partial(1, 0)(z[0], z[1]);
    fy += wgt * sys.F(k).partial(0, 1)(z[0], z[1]);
    gx += wgt * sys.G(k).partial(1, 0)(z[0], z[1]);
    gy += wgt * sys.G(k).partial(0, 1)(z[0], z[1]);
  }
  const double vpp = sys.potential_derivative().derivative()(z[0]);
  // J = [[fx, 1 + fy], [-V'' + gx, gy]]
  const double tr = fx + gy;
  const double det = fx * gy - (1 + fy) * (gx - vpp);
  const double disc = tr * tr - 4 * det;
  const std::complex<double> root = std::sqrt(std::complex<double>(disc, 0.0));
  return {(tr + root) / 2.0, (tr - root) / 2.0, tr, det, disc};
}

CriterionSet criteria(const PerturbedSystem& sys, const AssumptionProfile& p) {
  CriterionSet c;
  const int n = p.n;
  const int q = sys.q();
  const double delta = p.delta_nq ? 1.0 : 0.0;
  if (sys.lambda() > 0) {
    const double s = std::sqrt(sys.lambda());
    const double om1 = 2 * s * sys.w()(s);
    c.omega1_sq = om1;
    if (p.h) {
      const int k = n + *p.h;
      c.gamma_nh = sys.F(k).partial(1, 0)(s, 0.0) + sys.G(k).partial(0, 1)(s, 0.0);
    } else {
      c.d_n = om1 * sys.F(n).partial(0, 1)(s, 0.0) + sys.G(n)(s, 0.0) +
              sys.G(n).partial(1, 0)(s, 0.0);
    }
    return c;
  }
  if (sys.lambda() < 0) return c;
  const double w0 = sys.w()(0.0);
  const double g0 = sys.F(n).coeff(1, 0) + sys.G(n).coeff(0, 1);
  c.gamma_n0 = g0;
  if (p.as1_holds) {
    const int m = *p.m;
    c.alpha_nm = g0 + delta * 5.0 * (q + m) / (4.0 * q);
    const double glead = sys.G(n + m).coeff(0, 0);
    if (glead > 0) c.omega2_sq = 2 * w0 * std::sqrt(glead / w0);
  } else if (p.as2_holds) {
    const double d = delta_n(sys, p);
    c.delta_n = d;
    c.beta_n = g0 + delta * 2.5;
    if (d > 0) c.omega3_sq = std::sqrt(d);
  }
  return c;
}

namespace {

const char* kNeutralNote =
    "gamma < 0 but the damping enters at order t^(-(n+h)/q) with n+h > q; "
    "stable, asymptotic stability not guaranteed";
const char* kRescaledNote = "asymptotically stable in the rescaled variables";
const char* kMetastableNote =
    "escape is delayed, not excluded; measured in the rescaled weights the branch is unstable";

StabilityVerdict make(Branch b, Verdict v, std::string thm, const CriterionSet& c,
                      std::string notes = {}) {
  return {b, v, std::move(thm), c, std::move(notes)};
}

}  // namespace

StabilityVerdict classify(const CriterionSet& c, const AssumptionProfile& p, int q,
                          Branch branch) {
  const int n = p.n;
  const double delta = p.delta_nq ? 1.0 : 0.0;
  switch (branch) {
    case Branch::SigmaMinus:
    case Branch::MuMinus:
    case Branch::NuMinus:
      return make(branch, Verdict::Unstable, "saddle-linearization", c);
    case Branch::SigmaPlus: {
      if (c.gamma_nh) {
        const double g = *c.gamma_nh;
        if (g > 0) return make(branch, Verdict::Unstable, "gamma-instability", c);
        if (g < 0) {
          if (n + *p.h <= q) {
            return make(branch, Verdict::AsymptoticallyStable, "gamma-asymptotic-stability", c);
          }
          return make(branch, Verdict::Stable, "gamma-stability", c, kNeutralNote);
        }
        return make(branch, Verdict::Undetermined, "gamma-stability", c, "gamma = 0");
      }
      if (c.d_n) {
        const double d = *c.d_n;
        if (d > 0) return make(branch, Verdict::Stable, "hamiltonian-d-stability", c);
        if (d < 0) return make(branch, Verdict::Unstable, "hamiltonian-d-instability", c);
        return make(branch, Verdict::Undetermined, "hamiltonian-d-stability", c, "d_n = 0");
      }
      return make(branch, Verdict::Undetermined, "none", c, "criteria unavailable");
    }
    case Branch::MuPlus: {
      if (!c.alpha_nm || !p.m) {
        return make(branch, Verdict::Undetermined, "none", c, "alpha unavailable");
      }
      const double a = *c.alpha_nm;
      const int m = *p.m;
      if (a < 0) return make(branch, Verdict::Stable, "alpha-stability", c, kRescaledNote);
      if (a > delta * 3.0 * (q + m) / (2.0 * q)) {
        return make(branch, Verdict::Unstable, "alpha-instability", c);
      }
      if (p.delta_nq && a > 0 && a < (3.0 * q - m) / (4.0 * q)) {
        return make(branch, Verdict::Metastable, "alpha-metastability", c, kMetastableNote);
      }
      return make(branch, Verdict::Undetermined, "alpha-stability", c,
                  "alpha lies outside every decisive range");
    }
    case Branch::NuPlus: {
      if (!c.beta_n) return make(branch, Verdict::Undetermined, "none", c, "beta unavailable");
      const double b = *c.beta_n;
      if (b < 0) return make(branch, Verdict::Stable, "beta-stability", c, kRescaledNote);
      if (b > 3.0 * delta) return make(branch, Verdict::Unstable, "beta-instability", c);
      if (p.delta_nq && b > 0 && b < 0.5) {
        return make(branch, Verdict::Metastable, "beta-metastability", c, kMetastableNote);
      }
      return make(branch, Verdict::Undetermined, "beta-stability", c,
                  "beta lies outside every decisive range");
    }
  }
  (void)n;
  throw std::logic_error("unreachable");
}

StabilityVerdict classify(const PerturbedSystem& sys, Branch branch) {
  AssumptionProfile p = detect_profile(sys);
  int leading = 0;
  if (branch == Branch::MuPlus || branch == Branch::MuMinus) leading = p.n + p.m.value_or(0);
  if (branch == Branch::NuPlus || branch == Branch::NuMinus) leading = p.n;
  Construction con = [&]() -> Construction {
    try {
      return build_branch(sys, branch, leading);
    } catch (const AssumptionError& e) {
      throw ClassificationUnavailable(to_string(branch) + " unavailable: " + e.what(),
                                      std::nullopt);
    }
  }();
  if (auto* rep = std::get_if<EscapeReport>(&con)) {
    throw ClassificationUnavailable(
        to_string(branch) + " does not exist (" + to_string(rep->regime) + ")", *rep);
  }
  return classify(criteria(sys, p), p, sys.q(), branch);
}

// ----- Lyapunov functions ---------------------------------------------------

namespace {

bool fits(Branch b, LyapunovKind k) {
  switch (k) {
    case LyapunovKind::U1: return b == Branch::SigmaPlus || b == Branch::SigmaMinus;
    case LyapunovKind::U2:
    case LyapunovKind::W2Rescaled: return b == Branch::MuPlus || b == Branch::MuMinus;
    case LyapunovKind::U3:
    case LyapunovKind::W3Rescaled: return b == Branch::NuPlus || b == Branch::NuMinus;
  }
  return false;
}

}  // namespace

LyapunovFunction::LyapunovFunction(const PerturbedSystem& sys, const AsymptoticSolution& sol,
                                   LyapunovKind kind)
    : sys_(&sys), sol_(&sol), kind_(kind), profile_(detect_profile(sys)),
      crit_(criteria(sys, profile_)), vprime_(sys.potential_derivative()) {
  if (!fits(sol.branch, kind)) {
    throw std::invalid_argument("Lyapunov kind " + to_string(kind) + " does not apply to " +
                                to_string(sol.branch));
  }
  if (kind == LyapunovKind::U2 && !crit_.alpha_nm) {
    throw std::invalid_argument("U2 needs alpha");
  }
  if (kind == LyapunovKind::U3 && !crit_.beta_n) throw std::invalid_argument("U3 needs beta");
}

double LyapunovFunction::deviation_hamiltonian(double xi, double eta, double t) const {
  return deviation_hamiltonian(xi, eta, eval_asym(*sol_, t), t);
}

double LyapunovFunction::deviation_hamiltonian(double xi, double eta, const State& z,
                                               double t) const {
  // int_0^xi (V'(x* + s) - V'(x*)) ds
  double h = 0.5 * eta * eta;
  {
    const Poly1 p = vprime_.shifted(z[0]);
    double acc = 0.0;
    for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
      if (it->first == 0) continue;
      acc += it->second * std::pow(xi, it->first + 1) / (it->first + 1);
    }
    h += acc;
  }
  for (int k = 1; k <= sys_->k_pert(); ++k) {
    const Poly2& f = sys_->F(k);
    const Poly2& g = sys_->G(k);
    if (f.is_zero() && g.is_zero()) continue;
    double part = 0.0;
    if (!f.is_zero()) {
      // int_0^eta (F(x*+xi, y*+s) - F(x*, y*)) ds
      const Poly2 fs = f.shifted(z[0], z[1]);
      for (const auto& [key, c] : fs.terms()) {
        if (key.first == 0 && key.second == 0) continue;
        part += c * std::pow(xi, key.first) * std::pow(eta, key.second + 1) / (key.second + 1);
      }
    }
    if (!g.is_zero()) {
      // - int_0^xi (G(x*+s, y*) - G(x*, y*)) ds
      const Poly2 gs = g.shifted(z[0], z[1]);
      for (const auto& [key, c] : gs.terms()) {
        if (key.second != 0 || key.first == 0) continue;
        part -= c * std::pow(xi, key.first + 1) / (key.first + 1);
      }
    }
    h += std::pow(t, -static_cast<double>(k) / sys_->q()) * part;
  }
  return h;
}

double LyapunovFunction::operator()(const State& state, double t) const {
  return (*this)(state, eval_asym(*sol_, t), t);
}

double LyapunovFunction::operator()(const State& state, const State& z, double t) const {
  const double xi = state[0] - z[0];
  const double eta = state[1] - z[1];
  const int n = profile_.n;
  const double q = sys_->q();
  switch (kind_) {
    case LyapunovKind::U1: {
      const double h = deviation_hamiltonian(xi, eta, z, t);
      if (crit_.gamma_nh) {
        return h - 0.5 * *crit_.gamma_nh * std::pow(t, -(n + *profile_.h) / q) * xi * eta;
      }
      const double s = std::sqrt(sys_->lambda());
      const double om1 = *crit_.omega1_sq;
      const double dn = crit_.d_n.value_or(0.0);
      const double fy = sys_->F(n).partial(0, 1)(s, 0.0);
      const double fx = sys_->F(n).partial(1, 0)(s, 0.0);
      return h + std::pow(t, -1.0 - n / q) * (n / q) *
                     ((dn - 2 * om1 * fy) * xi * eta / (4 * om1) + fx * xi * xi / 2);
    }
    case LyapunovKind::U2:
    case LyapunovKind::W2Rescaled: {
      const int nm = n + *profile_.m;
      const double X = std::pow(t, nm / (2 * q)) * xi;
      const double Y = std::pow(t, 3 * nm / (4 * q)) * eta;
      if (kind_ == LyapunovKind::W2Rescaled) {
        return 0.5 * (std::abs(crit_.omega2_sq.value_or(1.0)) * X * X + Y * Y);
      }
      const double m = *profile_.m;
      const double h = deviation_hamiltonian(xi, eta, z, t);
      return std::pow(t, 3 * nm / (2 * q)) * h + nm / (2 * q) * std::pow(t, nm / (4 * q) - 1) * X * Y -
             std::pow(t, -(3 * n - m) / (4 * q)) * 0.5 * *crit_.alpha_nm * X * Y;
    }
    case LyapunovKind::U3:
    case LyapunovKind::W3Rescaled: {
      const double X = std::pow(t, n / q) * xi;
      const double Y = std::pow(t, 1.5 * n / q) * eta;
      if (kind_ == LyapunovKind::W3Rescaled) {
        return 0.5 * (std::abs(crit_.omega3_sq.value_or(1.0)) * X * X + Y * Y);
      }
      const double h = deviation_hamiltonian(xi, eta, z, t);
      return std::pow(t, 3 * n / q) * h + n / q * std::pow(t, n / (2 * q) - 1) * X * Y -
             std::pow(t, -n / (2 * q)) * 0.5 * *crit_.beta_n * X * Y;
    }
  }
  return 0.0;
}

double lyapunov_value(const PerturbedSystem& sys, const AsymptoticSolution& sol,
                      LyapunovKind kind, const State& z, double t) {
  return LyapunovFunction(sys, sol, kind)(z, t);
}

// ----- deviation norm -------------------------------------------------------

DeviationMeter::DeviationMeter(const PerturbedSystem& sys, const AsymptoticSolution& sol,
                               DeviationNorm norm)
    : sol_(&sol), norm_(norm) {
  const bool sigma = sol.branch == Branch::SigmaPlus || sol.branch == Branch::SigmaMinus;
  if (norm_ == DeviationNorm::Auto) {
    norm_ = sigma ? DeviationNorm::Weighted : DeviationNorm::Euclidean;
  }
  if (norm_ != DeviationNorm::Weighted) return;
  if (sigma) {
    // Needs no profile, so unperturbed systems are measured too.
    const double s = std::sqrt(sys.lambda());
    omega_sq_ = std::abs(2 * s * sys.w()(s));
    return;
  }
  const AssumptionProfile p = detect_profile(sys);
  const CriterionSet c = criteria(sys, p);
  const double q = sys.q();
  if (sol.branch == Branch::MuPlus || sol.branch == Branch::MuMinus) {
    const int nm = p.n + p.m.value_or(0);
    omega_sq_ = std::abs(c.omega2_sq.value_or(1.0));
    x_exp_ = nm / (2 * q);
    y_exp_ = 3 * nm / (4 * q);
  } else {
    omega_sq_ = std::abs(c.omega3_sq.value_or(1.0));
    x_exp_ = p.n / q;
    y_exp_ = 1.5 * p.n / q;
  }
}

double DeviationMeter::operator()(const State& s, double t) const {
  return (*this)(s, eval_asym(*sol_, t), t);
}

double DeviationMeter::operator()(const State& s, const State& z, double t) const {
  double xi = s[0] - z[0];
  double eta = s[1] - z[1];
  if (norm_ == DeviationNorm::Euclidean) return std::hypot(xi, eta);
  if (x_exp_ != 0.0) xi *= std::pow(t, x_exp_);
  if (y_exp_ != 0.0) eta *= std::pow(t, y_exp_);
  return std::sqrt(xi * xi + eta * eta / omega_sq_);
}

}  // namespace bifurlab
