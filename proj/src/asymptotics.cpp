#include "bifurlab/asymptotics.hpp"

#include <algorithm>
#include <cmath>

namespace bifurlab {

std::string to_string(Branch b) {
  switch (b) {
    case Branch::SigmaPlus: return "SigmaPlus";
    case Branch::SigmaMinus: return "SigmaMinus";
    case Branch::MuPlus: return "MuPlus";
    case Branch::MuMinus: return "MuMinus";
    case Branch::NuPlus: return "NuPlus";
    case Branch::NuMinus: return "NuMinus";
  }
  return "?";
}

Branch branch_from_string(const std::string& s) {
  for (Branch b : {Branch::SigmaPlus, Branch::SigmaMinus, Branch::MuPlus, Branch::MuMinus,
                   Branch::NuPlus, Branch::NuMinus}) {
    if (to_string(b) == s) return b;
  }
  throw std::invalid_argument("unknown branch: " + s);
}

int branch_sign(Branch b) {
  return (b == Branch::SigmaPlus || b == Branch::MuPlus || b == Branch::NuPlus) ? 1 : -1;
}

bool is_centre_type(Branch b) { return branch_sign(b) > 0; }

std::string to_string(EscapeRegime r) {
  return r == EscapeRegime::MuMissing ? "MuMissing" : "NuMissing";
}

namespace {

struct OrderResidual {
  FracSeries rx;
  FracSeries ry;
};

// Substitutes x = x0 + xi, y = eta into the system on a grid whose
// denominator is `stride` times q and returns (dx/dt - f, dy/dt - g),
// truncated at grid index k_top.
OrderResidual substitute(const PerturbedSystem& sys, const FracSeries& xi, const FracSeries& eta,
                         const Real& x0, int stride, int k_top) {
  const int den = xi.den();
  const Real zero = 0;
  FracSeries rx = series_ddt(xi).truncated(k_top) - eta.truncated(k_top);
  FracSeries quad = series_compose_poly2(Poly2({{{2, 0}, 1.0}, {{0, 0}, -sys.lambda()}}), xi,
                                         eta, x0, zero);
  FracSeries wser = series_compose_poly2(Poly2::from_x(sys.w()), xi, eta, x0, zero);
  FracSeries ry = series_ddt(eta).truncated(k_top) + series_mul(quad, wser).truncated(k_top);
  for (int l = 1; l <= sys.k_pert(); ++l) {
    const int shift = l * stride;
    if (shift > k_top) break;
    if (!sys.F(l).is_zero()) {
      rx = rx - series_shift(series_compose_poly2(sys.F(l), xi, eta, x0, zero), shift)
                    .truncated(k_top);
    }
    if (!sys.G(l).is_zero()) {
      ry = ry - series_shift(series_compose_poly2(sys.G(l), xi, eta, x0, zero), shift)
                    .truncated(k_top);
    }
  }
  (void)den;
  return {rx.truncated(k_top), ry.truncated(k_top)};
}

double max_abs_through(const FracSeries& s, int k_hi) {
  Real m = 0;
  for (int k = s.k_min(); k <= std::min(k_hi, s.k_max()); ++k) m = std::max(m, abs(s[k]));
  return static_cast<double>(m);
}

AssumptionProfile require_lambda_zero(const PerturbedSystem& sys, const char* what) {
  if (sys.lambda() != 0.0) {
    throw AssumptionError(std::string(what) + " requires lambda = 0");
  }
  AssumptionProfile p = detect_profile(sys);
  if (!p.as0_holds) throw AssumptionError(std::string(what) + ": n <= q fails");
  return p;
}

}  // namespace

double delta_n(const PerturbedSystem& sys, const AssumptionProfile& p) {
  const int n = p.n;
  const double delta = p.delta_nq ? 1.0 : 0.0;
  const double gx = sys.G(n).coeff(1, 0);
  const double gy = sys.G(n).coeff(0, 1);
  const double w0 = sys.w()(0.0);
  return gx * gx - 4.0 * w0 * ((gy + delta) * sys.F(n).coeff(0, 0) - sys.G(2 * n).coeff(0, 0));
}

int default_order(const PerturbedSystem& sys, Branch branch) {
  if (is_unperturbed(sys)) return 2 * sys.q();
  AssumptionProfile p = detect_profile(sys);
  const int steps = 2 * sys.q() + p.n;
  switch (branch) {
    case Branch::SigmaPlus:
    case Branch::SigmaMinus: return steps;
    case Branch::MuPlus:
    case Branch::MuMinus: return p.n + p.m.value_or(0) + steps;
    case Branch::NuPlus:
    case Branch::NuMinus: return p.n + steps;
  }
  return steps;
}

AsymptoticSolution build_sigma(const PerturbedSystem& sys, int sign, int order) {
  if (!(sys.lambda() > 0)) throw AssumptionError("sigma branches require lambda > 0");
  if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
  if (order < 0) throw std::invalid_argument("order must be >= 0");
  // The unperturbed system has the fixed point itself as its solution.
  if (!is_unperturbed(sys) && !detect_profile(sys).as0_holds) {
    throw AssumptionError("sigma branch: n <= q fails");
  }

  const int den = sys.q();
  const Real sigma = Real(sign) * sqrt(Real(sys.lambda()));
  const Real w_sigma = sys.w()(sigma);
  if (!(w_sigma > 0)) throw DomainError("w(sigma) must be positive");
  const Real v2 = 2 * sigma * w_sigma;

  FracSeries xi = FracSeries::zero(den, order);
  FracSeries eta = FracSeries::zero(den, order);
  std::vector<Real> xf, yf;
  for (int k = 1; k <= order; ++k) {
    OrderResidual r = substitute(sys, xi, eta, sigma, 1, order);
    const Real g = r.ry[k];
    const Real f = r.rx[k];
    xi = xi.with_coeff(k, -g / v2);
    eta = eta.with_coeff(k, f);
    xf.push_back(g);
    yf.push_back(f);
  }
  OrderResidual fin = substitute(sys, xi, eta, sigma, 1, order);

  AsymptoticSolution sol{
      .branch = sign > 0 ? Branch::SigmaPlus : Branch::SigmaMinus,
      .grid_den = den,
      .x = FracSeries::constant(den, sigma, order) + xi,
      .y = eta,
      .order = order,
      .leading = {0, sigma, 1, Real(0)},
      .x_forcing = std::move(xf),
      .y_forcing = std::move(yf),
      .solved_order_defect = std::max(max_abs_through(fin.rx, order),
                                      max_abs_through(fin.ry, order)),
  };
  return sol;
}

Construction build_mu(const PerturbedSystem& sys, int sign, int order) {
  AssumptionProfile p = require_lambda_zero(sys, "mu branch");
  if (!p.as1_holds) throw AssumptionError("mu branch: assumption on G_{n+m}(0,0) fails");
  if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
  const int n = p.n;
  const int m = *p.m;
  const int q = sys.q();
  const Real w0 = sys.w()(Real(0));
  const Real g_lead = sys.G(n + m).coeff(0, 0);
  if (g_lead == 0) throw AssumptionError("mu branch: G_{n+m}(0,0) = 0");

  if (g_lead < 0) {
    EscapeReport rep{};
    rep.regime = EscapeRegime::MuMissing;
    rep.theta1 = static_cast<double>(sqrt(abs(g_lead) / w0));
    rep.theta2 = 4.0 * q / (4.0 * q - n - m);
    rep.x_exponent = (n + m) / (2.0 * q);
    rep.y_exponent = 3.0 * (n + m) / (4.0 * q);
    rep.tau_exponent = 1.0 - (n + m) / (4.0 * q);
    rep.x_shift = 0.0;
    return rep;
  }
  if (order < n + m) throw std::invalid_argument("mu branch: order below leading index n+m");

  const int den = 2 * q;
  const int steps = order - (n + m);
  const int k_top = order + n + m;  // = 2(n+m) + steps
  const Real mu = sqrt(g_lead / w0);
  const Real x_lead = Real(sign) * mu;
  const Real y_lead = -Real(sys.F(n).coeff(0, 0));

  FracSeries xi = FracSeries::monomial(den, n + m, x_lead, k_top);
  FracSeries eta = FracSeries::monomial(den, 2 * n, y_lead, k_top);
  std::vector<Real> xf, yf;
  for (int k = 1; k <= steps; ++k) {
    OrderResidual r = substitute(sys, xi, eta, Real(0), 2, k_top);
    const Real g = r.ry[2 * (n + m) + k];
    const Real f = r.rx[2 * n + k];
    xi = xi.with_coeff(n + m + k, -g / (2 * x_lead * w0));
    eta = eta.with_coeff(2 * n + k, f);
    xf.push_back(g);
    yf.push_back(f);
  }
  OrderResidual fin = substitute(sys, xi, eta, Real(0), 2, k_top);

  return AsymptoticSolution{
      .branch = sign > 0 ? Branch::MuPlus : Branch::MuMinus,
      .grid_den = den,
      .x = xi.truncated(order),
      .y = eta.truncated(2 * n + steps),
      .order = order,
      .leading = {n + m, x_lead, 2 * n, y_lead},
      .x_forcing = std::move(xf),
      .y_forcing = std::move(yf),
      .solved_order_defect = std::max(max_abs_through(fin.rx, 2 * n + steps),
                                      max_abs_through(fin.ry, 2 * (n + m) + steps)),
  };
}

Construction build_nu(const PerturbedSystem& sys, int sign, int order) {
  AssumptionProfile p = require_lambda_zero(sys, "nu branch");
  if (!p.as2_holds) throw AssumptionError("nu branch: assumption on G_{2n}(0,0) fails");
  if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
  const int n = p.n;
  const int q = sys.q();
  const Real delta_nq = p.delta_nq ? 1 : 0;
  const Real w0 = sys.w()(Real(0));
  const Real gx = sys.G(n).coeff(1, 0);
  const Real gy = sys.G(n).coeff(0, 1);
  const Real disc = gx * gx - 4 * w0 * ((gy + delta_nq) * Real(sys.F(n).coeff(0, 0)) -
                                        Real(sys.G(2 * n).coeff(0, 0)));
  if (disc == 0) throw AssumptionError("nu branch: degenerate discriminant Delta_n = 0");
  if (disc < 0) {
    EscapeReport rep{};
    rep.regime = EscapeRegime::NuMissing;
    rep.theta1 = static_cast<double>(sqrt(-disc) / (2 * w0));
    rep.theta2 = 2.0 * q / (2.0 * q - n);
    rep.x_exponent = static_cast<double>(n) / q;
    rep.y_exponent = 3.0 * n / (2.0 * q);
    rep.tau_exponent = 1.0 - n / (2.0 * q);
    rep.x_shift = static_cast<double>(gx / (2 * w0));
    return rep;
  }
  if (order < n) throw std::invalid_argument("nu branch: order below leading index n");

  const int steps = order - n;
  const int k_top = 2 * n + steps;
  const Real x_lead = (gx + Real(sign) * sqrt(disc)) / (2 * w0);
  const Real y_lead = -Real(sys.F(n).coeff(0, 0));

  FracSeries xi = FracSeries::monomial(q, n, x_lead, k_top);
  FracSeries eta = FracSeries::monomial(q, n, y_lead, k_top);
  std::vector<Real> xf, yf;
  for (int k = 1; k <= steps; ++k) {
    OrderResidual r = substitute(sys, xi, eta, Real(0), 1, k_top);
    const Real rx = r.rx[n + k];
    const Real ry = r.ry[2 * n + k];
    // Unknowns (x_{n+k}, y_{n+k}):
    //   [0 -1] [x]   [-rx]
    //   [a  b] [y] = [-ry]
    const Real a = 2 * x_lead * w0 - gx;
    const Real b = -(gy + (1 + Real(k) / q) * delta_nq);
    const Real det = a;
    const Real scale = sqrt(a * a + b * b);
    if (abs(det) < Real(1e-12) * scale) {
      throw AssumptionError("nu branch: order system is ill-conditioned at step " +
                            std::to_string(k));
    }
    const Real x_new = (-rx * b - ry) / det;
    const Real y_new = rx;
    xi = xi.with_coeff(n + k, x_new);
    eta = eta.with_coeff(n + k, y_new);
    xf.push_back(ry);
    yf.push_back(rx);
  }
  OrderResidual fin = substitute(sys, xi, eta, Real(0), 1, k_top);

  return AsymptoticSolution{
      .branch = sign > 0 ? Branch::NuPlus : Branch::NuMinus,
      .grid_den = q,
      .x = xi.truncated(order),
      .y = eta.truncated(order),
      .order = order,
      .leading = {n, x_lead, n, y_lead},
      .x_forcing = std::move(xf),
      .y_forcing = std::move(yf),
      .solved_order_defect = std::max(max_abs_through(fin.rx, n + steps),
                                      max_abs_through(fin.ry, 2 * n + steps)),
  };
}

Construction build_branch(const PerturbedSystem& sys, Branch branch, int order) {
  if (order < 0) order = default_order(sys, branch);
  const int sign = branch_sign(branch);
  switch (branch) {
    case Branch::SigmaPlus:
    case Branch::SigmaMinus: return build_sigma(sys, sign, order);
    case Branch::MuPlus:
    case Branch::MuMinus: return build_mu(sys, sign, order);
    case Branch::NuPlus:
    case Branch::NuMinus: return build_nu(sys, sign, order);
  }
  throw std::logic_error("unreachable");
}

std::vector<Branch> applicable_branches(const PerturbedSystem& sys) {
  AssumptionProfile p = detect_profile(sys);
  if (!p.as0_holds) return {};
  if (sys.lambda() > 0) return {Branch::SigmaPlus, Branch::SigmaMinus};
  if (sys.lambda() == 0 && p.as1_holds) return {Branch::MuPlus, Branch::MuMinus};
  if (sys.lambda() == 0 && p.as2_holds) return {Branch::NuPlus, Branch::NuMinus};
  return {};
}

std::array<Real, 2> eval_asym_ext(const AsymptoticSolution& sol, const Real& t) {
  if (!(t > 0)) throw DomainError("eval_asym: t must be positive");
  return {sol.x.eval(t), sol.y.eval(t)};
}

std::array<Real, 2> eval_asym_ddt_ext(const AsymptoticSolution& sol, const Real& t) {
  if (!(t > 0)) throw DomainError("eval_asym: t must be positive");
  return {series_ddt(sol.x).eval(t), series_ddt(sol.y).eval(t)};
}

namespace {

double eval_double(const FracSeries& s, double t) {
  const double sv = std::pow(t, -1.0 / s.den());
  double acc = 0.0;
  const auto& c = s.coeffs();
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * sv + static_cast<double>(*it);
  return acc * std::pow(sv, s.k_min());
}

}  // namespace

State eval_asym(const AsymptoticSolution& sol, double t) {
  if (!(t > 0)) throw DomainError("eval_asym: t must be positive");
  return {eval_double(sol.x, t), eval_double(sol.y, t)};
}

std::array<double, 2> residual(const AsymptoticSolution& sol, const PerturbedSystem& sys,
                               double t) {
  const Real tt = t;
  auto z = eval_asym_ext(sol, tt);
  auto dz = eval_asym_ddt_ext(sol, tt);
  auto f = sys.rhs<Real>(z[0], z[1], tt);
  return {static_cast<double>(dz[0] - f[0]), static_cast<double>(dz[1] - f[1])};
}

}  // namespace bifurlab
