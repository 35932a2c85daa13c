#pragma once

// Shared fixtures for the unit and acceptance tests: random polynomial
// systems and hand-derived oracles that do not go through the library's
// recursion.

#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "bifurlab/asymptotics.hpp"
#include "bifurlab/model.hpp"
#include "bifurlab/presets.hpp"

namespace testsupport {

using namespace bifurlab;

inline Poly2 random_poly2(std::mt19937_64& rng, int max_deg, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> c(lo, hi);
  std::map<Poly2::Key, double> m;
  for (int i = 0; i <= max_deg; ++i) {
    for (int j = 0; i + j <= max_deg; ++j) m[{i, j}] = c(rng);
  }
  return Poly2(m);
}

inline Poly1 random_w(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  std::uniform_real_distribution<double> w0(0.5, 2.0);
  return Poly1({{0, w0(rng)}, {1, c(rng)}, {2, c(rng)}});
}

/// Random lambda = 0 system with n = 1 and m = 0 (G_1(0,0) > 0), q >= 2.
struct MuCase {
  PerturbedSystem sys;
  int q;
};

inline MuCase random_mu_case(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> qd(2, 4);
  const int q = qd(rng);
  Poly1 w = random_w(rng);
  Poly2 F1 = random_poly2(rng, 3), F2 = random_poly2(rng, 3);
  Poly2 G1 = random_poly2(rng, 3), G2 = random_poly2(rng, 3);
  std::uniform_real_distribution<double> pos(0.2, 2.0);
  auto terms = G1.terms();
  terms[{0, 0}] = pos(rng);
  G1 = Poly2(terms);
  return {PerturbedSystem(0.0, q, w, {F1, F2}, {G1, G2}), q};
}

/// The explicit low-order expressions for n = 1, m = 0, written out from
/// the Taylor expansion by hand. Index convention: g1, g2 are the x-order
/// forcings of the first two steps, f3, f4 the values of y_3 and y_4.
struct MuExplicit {
  double g1, g2, f3, f4;
  double g1_scale, g2_scale, f3_scale, f4_scale;  ///< sums of |terms|
};

inline MuExplicit mu_explicit(const PerturbedSystem& sys, double x1, double x2, double y2) {
  const Poly1& w = sys.w();
  const double w0 = w(0.0), w1 = w.derivative()(0.0), w2 = w.derivative(2)(0.0);
  const Poly2& F1 = sys.F(1);
  const Poly2& G1 = sys.G(1);
  const double G1x = G1.coeff(1, 0), G1y = G1.coeff(0, 1), G1xx = 2 * G1.coeff(2, 0);
  const double F1x = F1.coeff(1, 0), F1y = F1.coeff(0, 1), F1xx = 2 * F1.coeff(2, 0);
  const double G2 = sys.G(2).coeff(0, 0), F2 = sys.F(2).coeff(0, 0);

  MuExplicit e{};
  const double a1 = x1 * x1 * x1 * w1, a2 = -x1 * G1x;
  e.g1 = a1 + a2;
  e.g1_scale = std::abs(a1) + std::abs(a2);
  const double b[] = {x2 * x2 * w0,  3 * x1 * x1 * x2 * w1, 0.5 * x1 * x1 * x1 * x1 * w2, -G2,
                      -x2 * G1x,     -y2 * G1y,             -0.5 * x1 * x1 * G1xx};
  for (double v : b) {
    e.g2 += v;
    e.g2_scale += std::abs(v);
  }
  e.f3 = -x1 * F1x;
  e.f3_scale = std::abs(e.f3);
  const double c[] = {-F2, -x2 * F1x, -y2 * F1y, -0.5 * x1 * x1 * F1xx};
  for (double v : c) {
    e.f4 += v;
    e.f4_scale += std::abs(v);
  }
  return e;
}

inline bool rel_close(double a, double b, double scale, double tol) {
  return std::abs(a - b) <= tol * std::max(scale, 1e-300);
}

/// The eleven worked-example parameter sets with the expected verdict of
/// the centre-type branch.
struct ExampleCase {
  const char* name;
  PerturbedSystem sys;
  Branch branch;
  const char* expected;  ///< to_string(Verdict)
};

inline std::vector<ExampleCase> example_cases() {
  auto e1 = [](double lambda, double B, double C, double kappa) {
    return example1({lambda, B, C, kappa});
  };
  auto e2 = [](double lambda, double B) { return example2({lambda, 1.0, B, 1.0}); };
  return {
      {"ex1 lambda=1 B=0.1", e1(1, 0.1, 1.5, 0.5), Branch::SigmaPlus, "Unstable"},
      {"ex1 lambda=1 B=0 C=1.5", e1(1, 0.0, 1.5, 0.5), Branch::SigmaPlus, "Stable"},
      {"ex1 lambda=1 B=-0.5", e1(1, -0.5, 1.5, 0.5), Branch::SigmaPlus, "AsymptoticallyStable"},
      {"ex1 lambda=0 B=0.5", e1(0, 0.5, 1.5, 1.0), Branch::MuPlus, "Unstable"},
      {"ex1 lambda=0 B=-0.6", e1(0, -0.6, 1.5, 1.0), Branch::MuPlus, "Metastable"},
      {"ex1 lambda=0 B=-1.5", e1(0, -1.5, 1.5, 1.0), Branch::MuPlus, "Stable"},
      {"ex2 lambda=0.25 B=-1", e2(0.25, -1.0), Branch::SigmaPlus, "AsymptoticallyStable"},
      {"ex2 lambda=0.25 B=0.5", e2(0.25, 0.5), Branch::SigmaPlus, "Unstable"},
      {"ex2 lambda=0 B=-3", e2(0.0, -3.0), Branch::NuPlus, "Stable"},
      {"ex2 lambda=0 B=-2.25", e2(0.0, -2.25), Branch::NuPlus, "Metastable"},
      {"ex2 lambda=0 B=1", e2(0.0, 1.0), Branch::NuPlus, "Unstable"},
  };
}

/// Log-log least-squares slope.
inline double loglog_slope(const std::vector<double>& t, const std::vector<double>& v) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double lx = std::log(t[i]), ly = std::log(v[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace testsupport
