#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "bifurlab/classifier.hpp"
#include "bifurlab/integrator.hpp"
#include "bifurlab/presets.hpp"
#include "bifurlab/validation.hpp"
#include "support.hpp"

using namespace bifurlab;

namespace {

AsymptoticSolution branch(const PerturbedSystem& sys, Branch b, int order = -1) {
  Construction c = build_branch(sys, b, order);
  REQUIRE(std::holds_alternative<AsymptoticSolution>(c));
  return std::get<AsymptoticSolution>(c);
}

}  // namespace

TEST_CASE("linearization limits for lambda = 1, w = 1") {
  PerturbedSystem sys = example1({1.0, -0.5, 1.5, 0.5});
  const double t = 1e6;
  EigenPair saddle = linearize(sys, branch(sys, Branch::SigmaMinus), t);
  CHECK(saddle.e_plus.imag() == 0.0);
  CHECK(saddle.e_plus.real() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-2));
  CHECK(saddle.e_minus.real() == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-2));
  EigenPair centre = linearize(sys, branch(sys, Branch::SigmaPlus), t);
  CHECK(std::abs(centre.e_plus.real()) < 1e-2);
  CHECK(centre.e_plus.imag() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-2));
  CHECK(centre.e_minus.imag() == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-2));
}

TEST_CASE("saddle-type sigma eigenvalues are real with opposite signs") {
  for (double t : {1e3, 1e6}) {
    for (const auto& c : testsupport::example_cases()) {
      if (c.sys.lambda() <= 0) continue;
      EigenPair e = linearize(c.sys, branch(c.sys, Branch::SigmaMinus), t);
      CHECK(e.discriminant > 0);
      CHECK(e.e_plus.real() > 0);
      CHECK(e.e_minus.real() < 0);
    }
  }
}

TEST_CASE("nu-minus eigenvalues scale like t^(-n/2q) (1/2) sqrt(D)") {
  // D = 4 N t^(-n/q) with N = sqrt(Delta_n) for nu_-, so e = +-sqrt(N) t^(-1/2).
  PerturbedSystem sys = example2({0.0, 1.0, 1.0, 1.0});
  AsymptoticSolution sol = branch(sys, Branch::NuMinus);
  const double N = std::sqrt(5.0);
  for (double t : {1e4, 1e6}) {
    EigenPair e = linearize(sys, sol, t);
    CHECK(e.e_plus.imag() == 0.0);
    CHECK(e.e_plus.real() * std::sqrt(t) == doctest::Approx(std::sqrt(N)).epsilon(1e-2));
    CHECK(e.e_minus.real() * std::sqrt(t) == doctest::Approx(-std::sqrt(N)).epsilon(1e-2));
  }
}

TEST_CASE("eigenvalues agree with a finite-difference Jacobian") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    PerturbedSystem sys(0.5 + u(rng) * 0.4, 2, Poly1({{0, 1.0}, {1, 0.2 * u(rng)}}),
                        {testsupport::random_poly2(rng, 2), testsupport::random_poly2(rng, 2)},
                        {testsupport::random_poly2(rng, 2), testsupport::random_poly2(rng, 2)});
    AsymptoticSolution sol = build_sigma(sys, trial % 2 ? 1 : -1, 3);
    const double t = std::pow(10.0, 1 + 3 * std::abs(u(rng)));
    EigenPair e = linearize(sys, sol, t);
    const State z = eval_asym(sol, t);
    const double h = 1e-6;
    auto col = [&](int i) {
      State p = z, m = z;
      p[static_cast<std::size_t>(i)] += h;
      m[static_cast<std::size_t>(i)] -= h;
      State a = sys.rhs(p, t), b = sys.rhs(m, t);
      return State{(a[0] - b[0]) / (2 * h), (a[1] - b[1]) / (2 * h)};
    };
    const State c0 = col(0), c1 = col(1);
    const double tr = c0[0] + c1[1];
    const double det = c0[0] * c1[1] - c1[0] * c0[1];
    CHECK(e.trace == doctest::Approx(tr).epsilon(1e-6).scale(1.0));
    CHECK(e.determinant == doctest::Approx(det).epsilon(1e-6).scale(1.0));
    const auto prod = e.e_plus * e.e_minus, sum = e.e_plus + e.e_minus;
    CHECK(prod.real() == doctest::Approx(e.determinant).epsilon(1e-12).scale(1.0));
    CHECK(sum.real() == doctest::Approx(e.trace).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("criteria of the worked examples") {
  for (double B : {-0.5, 0.0, 0.7}) {
    for (double lambda : {1.0, 0.25}) {
      PerturbedSystem sys = example1({lambda, B, 1.5, 0.5});
      CriterionSet c = criteria(sys, detect_profile(sys));
      if (B != 0.0) {
        REQUIRE(c.gamma_nh.has_value());
        CHECK(*c.gamma_nh == B);
      } else {
        // B = 0 makes the perturbation Hamiltonian; d_n = C.
        REQUIRE(c.d_n.has_value());
        CHECK(*c.d_n == doctest::Approx(1.5));
      }
    }
    PerturbedSystem zero = example1({0.0, B, 1.5, 0.5});
    CHECK(*criteria(zero, detect_profile(zero)).gamma_n0 == B);
  }
  PerturbedSystem ex2 = example2({0.25, 1.0, -1.0, 1.0});
  CHECK(*criteria(ex2, detect_profile(ex2)).gamma_nh == doctest::Approx(-1.0 + 0.5));
}

TEST_CASE("verdicts of the worked examples") {
  for (const auto& c : testsupport::example_cases()) {
    INFO(c.name);
    StabilityVerdict v = classify(c.sys, c.branch);
    CHECK(to_string(v.verdict) == c.expected);
    const Branch partner = c.branch == Branch::SigmaPlus ? Branch::SigmaMinus
                           : c.branch == Branch::MuPlus  ? Branch::MuMinus
                                                         : Branch::NuMinus;
    CHECK(classify(c.sys, partner).verdict == Verdict::Unstable);
  }
}

TEST_CASE("specific verdict details") {
  PerturbedSystem s = example2({0.0, 1.0, -3.0, 1.0});
  StabilityVerdict v = classify(s, Branch::NuPlus);
  CHECK(*v.criteria.beta_n == -0.5);
  PerturbedSystem u = example2({0.0, 1.0, 1.0, 1.0});
  CHECK(*classify(u, Branch::NuPlus).criteria.beta_n == 3.5);
  PerturbedSystem neutral = example1({1.0, -0.5, 1.5, 2.0 / 3.0});  // n = 2, q = 3
  CHECK(classify(neutral, Branch::SigmaPlus).verdict == Verdict::AsymptoticallyStable);
  // n + h > q: stable, with the neutral note.
  // n = 2, h = 1, q = 2.
  PerturbedSystem late(1.0, 2, Poly1::constant(1), {Poly2(), Poly2(), Poly2()},
                       {Poly2(), Poly2::constant(1.0), Poly2({{{0, 1}, -0.5}})});
  StabilityVerdict lv = classify(late, Branch::SigmaPlus);
  CHECK(lv.verdict == Verdict::Stable);
  CHECK_FALSE(lv.notes.empty());
  StabilityVerdict mv = classify(example2({0.0, 1.0, -2.25, 1.0}), Branch::NuPlus);
  CHECK(mv.verdict == Verdict::Metastable);
  CHECK(mv.notes.find("unstable") != std::string::npos);
}

TEST_CASE("escape regime blocks classification") {
  PerturbedSystem sys = example1({0.0, -1.5, -0.1, 1.0});
  try {
    (void)classify(sys, Branch::MuPlus);
    FAIL("expected ClassificationUnavailable");
  } catch (const ClassificationUnavailable& e) {
    REQUIRE(e.report().has_value());
    CHECK(e.report()->regime == EscapeRegime::MuMissing);
  }
}

TEST_CASE("classify is a pure function of its inputs") {
  for (const auto& c : testsupport::example_cases()) {
    AssumptionProfile p = detect_profile(c.sys);
    CriterionSet crit = criteria(c.sys, p);
    CHECK(classify(crit, p, c.sys.q(), c.branch) == classify(crit, p, c.sys.q(), c.branch));
    CHECK(classify(crit, p, c.sys.q(), c.branch) == classify(c.sys, c.branch));
  }
}

TEST_CASE("example 2 verdict boundaries in B") {
  // beta = B + 5/2 exactly; stable below -5/2, metastable in (-5/2, -2),
  // undetermined in [-2, 1/2], unstable above 1/2.
  auto v = [](double B) { return classify(example2({0.0, 1.0, B, 1.0}), Branch::NuPlus).verdict; };
  CHECK(v(-2.5 - 1e-9) == Verdict::Stable);
  CHECK(v(-2.5) == Verdict::Undetermined);
  CHECK(v(-2.5 + 1e-9) == Verdict::Metastable);
  CHECK(v(-2.0 - 1e-9) == Verdict::Metastable);
  CHECK(v(-2.0) == Verdict::Undetermined);
  CHECK(v(0.0) == Verdict::Undetermined);
  CHECK(v(0.5) == Verdict::Undetermined);
  CHECK(v(0.5 + 1e-9) == Verdict::Unstable);
}

TEST_CASE("example 1 mu verdict boundaries in B (kappa = 1)") {
  // alpha = B + 5/4: stable below -5/4, metastable in (-5/4, -1/2),
  // unstable above 1/4.
  auto v = [](double B) { return classify(example1({0.0, B, 1.5, 1.0}), Branch::MuPlus).verdict; };
  CHECK(v(-1.3) == Verdict::Stable);
  CHECK(v(-1.25) == Verdict::Undetermined);
  CHECK(v(-1.0) == Verdict::Metastable);
  CHECK(v(-0.5) == Verdict::Undetermined);
  CHECK(v(0.0) == Verdict::Undetermined);
  CHECK(v(0.3) == Verdict::Unstable);
}

TEST_CASE("Lyapunov functions vanish at zero deviation") {
  for (const auto& c : testsupport::example_cases()) {
    for (Branch b : applicable_branches(c.sys)) {
      Construction con = build_branch(c.sys, b);
      if (!std::holds_alternative<AsymptoticSolution>(con)) continue;
      const auto& sol = std::get<AsymptoticSolution>(con);
      std::vector<LyapunovKind> kinds;
      if (b == Branch::SigmaPlus || b == Branch::SigmaMinus) kinds = {LyapunovKind::U1};
      if (b == Branch::MuPlus || b == Branch::MuMinus) kinds = {LyapunovKind::U2, LyapunovKind::W2Rescaled};
      if (b == Branch::NuPlus || b == Branch::NuMinus) kinds = {LyapunovKind::U3, LyapunovKind::W3Rescaled};
      for (LyapunovKind k : kinds) {
        for (double t : {10.0, 1e4}) {
          CHECK(lyapunov_value(c.sys, sol, k, eval_asym(sol, t), t) == 0.0);
        }
      }
    }
  }
}

TEST_CASE("U1 is the quadratic energy for small deviations") {
  PerturbedSystem sys = example1({1.0, -0.5, 1.5, 0.5});
  AsymptoticSolution sol = branch(sys, Branch::SigmaPlus);
  const double om1 = 2.0;  // 2 sqrt(lambda) w(sqrt(lambda))
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> ang(0.0, 6.283185307179586);
  for (double t : {1e3, 1e5}) {
    for (double rho : {1e-3, 1e-4}) {
      const double a = ang(rng);
      const double xi = rho * std::cos(a), eta = rho * std::sin(a);
      const State z = eval_asym(sol, t);
      const double u = lyapunov_value(sys, sol, LyapunovKind::U1, {z[0] + xi, z[1] + eta}, t);
      CHECK(u == doctest::Approx((om1 * xi * xi + eta * eta) / 2).epsilon(0.1));
    }
  }
}

TEST_CASE("Lyapunov kind must fit the branch") {
  PerturbedSystem sys = example2({0.0, 1.0, -3.0, 1.0});
  AsymptoticSolution sol = branch(sys, Branch::NuPlus);
  CHECK_THROWS_AS(LyapunovFunction(sys, sol, LyapunovKind::U1), std::invalid_argument);
  CHECK_NOTHROW(LyapunovFunction(sys, sol, LyapunovKind::U3));
}

TEST_CASE("Lyapunov functions along a stable example 2 trajectory") {
  PerturbedSystem sys = example2({0.0, 1.0, -3.0, 1.0});
  AsymptoticSolution sol = branch(sys, Branch::NuPlus);
  IntegratorConfig cfg;
  cfg.t0 = 10.0;
  cfg.t_end = 1e5;
  ProbeOptions opt;
  Trajectory tr = probe_trajectory(sys, sol, 0.05, cfg, opt, 400);
  REQUIRE(tr.terminated_by == Termination::TEnd);
  // U3 carries the correction terms and decreases step by step.
  MonotonicityResult m = lyapunov_monotonicity(sys, sol, tr, LyapunovKind::U3);
  CHECK(m.expected_sign == -1);
  CHECK(m.pairs_used > 100);
  CHECK(m.fraction_violating == 0.0);
  // The bare quadratic form oscillates within a period but decays overall.
  auto w3 = [&](std::size_t i) {
    return lyapunov_value(sys, sol, LyapunovKind::W3Rescaled, tr.states[i], tr.times[i]);
  };
  CHECK(w3(380) < 0.1 * w3(40));
}
