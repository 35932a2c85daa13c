#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bifurlab/presets.hpp"
#include "bifurlab/report.hpp"
#include "bifurlab/validation.hpp"
#include "support.hpp"

using namespace bifurlab;

namespace {

AsymptoticSolution branch(const PerturbedSystem& sys, Branch b, int order = -1) {
  Construction c = build_branch(sys, b, order);
  REQUIRE(std::holds_alternative<AsymptoticSolution>(c));
  return std::get<AsymptoticSolution>(c);
}

const std::vector<double> kGrid = log_spaced(1e3, 1e6, 16);

ProbeReport default_probe(const PerturbedSystem& sys, Branch b) {
  const ValidationSettings s;
  return probe(sys, branch(sys, b), s.offsets, s.horizons, s.radius, s.cfg, s.probe);
}

// Synthetic table with one horizon; nullopt means the offset stayed.
ProbeReport table(const std::vector<std::optional<double>>& tau, double horizon = 1e5) {
  ProbeReport r{Branch::SigmaPlus, {}, {horizon}, {}, EmpiricalVerdict::Inconclusive, {}};
  double off = 0.1;
  for (const auto& t : tau) {
    r.offsets.push_back(off);
    off /= 4;
    CellOutcome c;
    if (t) c.escape_time = *t;
    else c.stayed = true;
    r.outcomes.push_back({c});
  }
  return r;
}

}  // namespace

TEST_CASE("check_order examples") {
  SUBCASE("sigma to order 1: residual ~ t^-1") {
    PerturbedSystem sys = example1({1.0, 0.0, 1.5, 0.5});
    SlopeFit f = check_order(build_sigma(sys, +1, 1), sys, kGrid);
    CHECK(f.slope == doctest::Approx(-1.0).epsilon(0.05));
    CHECK(f.passes);
    CHECK(f.threshold == doctest::Approx(-0.8));
  }
  SUBCASE("unperturbed fixed point is exact") {
    PerturbedSystem sys(1.0, 1, Poly1::constant(1), {Poly2()}, {Poly2()});
    SlopeFit f = check_order(build_sigma(sys, +1, 0), sys, kGrid);
    CHECK(f.exact);
    CHECK(f.passes);
  }
  SUBCASE("terminating mu series is exact") {
    // x = sqrt(1.5/t), y = -sqrt(1.5)/2 t^(-3/2) solve example 1 at B = -3/2.
    PerturbedSystem sys = example1({0.0, -1.5, 1.5, 1.0});
    CHECK(check_order(branch(sys, Branch::MuPlus), sys, kGrid).exact);
  }
  SUBCASE("nu+ at leading order") {
    PerturbedSystem sys = example2({0.0, 1.0, -3.0, 1.0});
    SlopeFit f = check_order(branch(sys, Branch::NuPlus, 1), sys, kGrid);
    CHECK(f.threshold == doctest::Approx(-1.8));
    CHECK(f.slope <= -1.8);
  }
}

TEST_CASE("check_order needs three decades") {
  PerturbedSystem sys = example1({1.0, 0.0, 1.5, 0.5});
  AsymptoticSolution sol = build_sigma(sys, +1, 2);
  CHECK_THROWS_AS((void)check_order(sol, sys, log_spaced(1e3, 1e5, 10)), std::invalid_argument);
  CHECK_NOTHROW((void)check_order(sol, sys, log_spaced(1e3, 1e6, 10)));
}

TEST_CASE("empirical_verdict on synthetic tables") {
  using E = EmpiricalVerdict;
  CHECK(empirical_verdict(table({{}, {}, {}, {}}), 10) == E::ConsistentStable);
  CHECK(empirical_verdict(table({50.0, 60.0, 55.0, 70.0}), 10) == E::ConsistentUnstable);
  CHECK(empirical_verdict(table({50.0, 200.0, 900.0, 4000.0}), 10) == E::ConsistentMetastable);
  // Censored escapes count as infinitely late.
  CHECK(empirical_verdict(table({50.0, 800.0, {}, {}}), 10) == E::ConsistentMetastable);
  // Growth below the factor, or not monotone.
  CHECK(empirical_verdict(table({50.0, 100.0, {}, 300.0}), 10) == E::Inconclusive);
  CHECK(empirical_verdict(table({50.0, 20.0, 900.0, 400.0}), 10) == E::Inconclusive);
  CHECK(empirical_verdict(table({{}, 50.0, 900.0, 4000.0}), 10) == E::Inconclusive);
  // A failed row is dropped; with one row left nothing can be said.
  ProbeReport r = table({50.0, 60.0});
  r.outcomes[1][0].error = "boom";
  CHECK(empirical_verdict(r, 10) == E::Inconclusive);
  CHECK(empirical_verdict(table({50.0, 60.0}, 5.0), 10) == E::Inconclusive);
}

TEST_CASE("agrees maps verdicts to empirical outcomes") {
  using E = EmpiricalVerdict;
  CHECK(agrees(E::ConsistentStable, Verdict::AsymptoticallyStable));
  CHECK(agrees(E::ConsistentStable, Verdict::Stable));
  CHECK(agrees(E::ConsistentUnstable, Verdict::Unstable));
  CHECK(agrees(E::ConsistentMetastable, Verdict::Metastable));
  CHECK_FALSE(agrees(E::ConsistentMetastable, Verdict::Unstable));
  CHECK_FALSE(agrees(E::ConsistentStable, Verdict::Undetermined));
}

TEST_CASE("escape_exponent recovers a power law") {
  std::vector<std::optional<double>> tau;
  for (double off = 0.1; tau.size() < 4; off /= 4) tau.push_back(3.0 * std::pow(off, -2.0));
  CHECK(*escape_exponent(table(tau)) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_FALSE(escape_exponent(table({5.0, {}, {}})).has_value());
}

TEST_CASE("offset_state sits at the requested distance") {
  for (const auto& c : testsupport::example_cases()) {
    const AsymptoticSolution sol = branch(c.sys, c.branch);
    const ReferencePath path(c.sys, sol, 10.0, 1e3);
    for (double angle : {0.0, 1.0, 2.5}) {
      ProbeOptions opt;
      opt.direction_angle = angle;
      const State ic = offset_state(c.sys, sol, path, 0.05, 10.0, opt);
      const DeviationMeter meter(c.sys, sol, DeviationNorm::Auto);
      CHECK(meter(ic, path(10.0), 10.0) == doctest::Approx(0.05).epsilon(1e-10));
    }
  }
}

TEST_CASE("probe argument checks and the degenerate horizon") {
  PerturbedSystem sys = example2({0.0, 1.0, -3.0, 1.0});
  AsymptoticSolution sol = branch(sys, Branch::NuPlus);
  IntegratorConfig cfg;
  cfg.t0 = 10.0;
  CHECK_THROWS_AS((void)probe(sys, sol, {0.1, 0.2}, {1e3}, 0.2, cfg), std::invalid_argument);
  CHECK_THROWS_AS((void)probe(sys, sol, {0.1}, {1e4, 1e3}, 0.2, cfg), std::invalid_argument);
  CHECK_THROWS_AS((void)probe(sys, sol, {0.1}, {1e3}, 0.0, cfg), std::invalid_argument);
  ProbeReport r = probe(sys, sol, {0.1, 0.01}, {5.0}, 0.2, cfg);
  CHECK(r.empirical_verdict == EmpiricalVerdict::Inconclusive);
  for (const auto& row : r.outcomes) CHECK(row[0].stayed);
}

TEST_CASE("probe on example 2 at lambda = 0") {
  SUBCASE("B = -3 stays") {
    ProbeReport r = default_probe(example2({0.0, 1.0, -3.0, 1.0}), Branch::NuPlus);
    CHECK(r.empirical_verdict == EmpiricalVerdict::ConsistentStable);
    REQUIRE(r.theory_verdict.has_value());
    CHECK(r.theory_verdict->verdict == Verdict::Stable);
  }
  SUBCASE("B = -2.25 is metastable") {
    ProbeReport r = default_probe(example2({0.0, 1.0, -2.25, 1.0}), Branch::NuPlus);
    CHECK(r.empirical_verdict == EmpiricalVerdict::ConsistentMetastable);
  }
  SUBCASE("B = 1 loses every offset") {
    ProbeReport r = default_probe(example2({0.0, 1.0, 1.0, 1.0}), Branch::NuPlus);
    for (const auto& row : r.outcomes) CHECK(row.back().escape_time.has_value());
  }
}

TEST_CASE("probe on example 1 at lambda = 0, B = -0.6 is metastable") {
  ProbeReport r = default_probe(example1({0.0, -0.6, 1.5, 1.0}), Branch::MuPlus);
  CHECK(r.empirical_verdict == EmpiricalVerdict::ConsistentMetastable);
}

TEST_CASE("gamma > 0 escapes follow exp(c sqrt(t))") {
  // Deviation ~ delta exp(c sqrt(t)), so sqrt(tau) is affine in log(1/delta)
  // and rises by a fixed amount per ladder step.
  ProbeReport r = default_probe(example1({1.0, 0.1, 1.5, 0.5}), Branch::SigmaPlus);
  std::vector<double> root;
  for (const auto& row : r.outcomes) {
    REQUIRE(row.back().escape_time.has_value());
    root.push_back(std::sqrt(*row.back().escape_time));
  }
  const double step = root[1] - root[0];
  CHECK(step > 0);
  for (std::size_t i = 2; i < root.size(); ++i) {
    CHECK(root[i] - root[i - 1] == doctest::Approx(step).epsilon(0.15));
  }
}

TEST_CASE("Lyapunov monotonicity") {
  IntegratorConfig cfg;
  cfg.t0 = 10.0;
  cfg.t_end = 1e5;
  SUBCASE("U1 decreases on the asymptotically stable centre") {
    PerturbedSystem sys = example1({1.0, -0.5, 1.5, 0.5});
    AsymptoticSolution sol = branch(sys, Branch::SigmaPlus);
    Trajectory tr = probe_trajectory(sys, sol, 0.05, cfg, {}, 400);
    MonotonicityResult m = lyapunov_monotonicity(sys, sol, tr, LyapunovKind::U1);
    CHECK(m.expected_sign == -1);
    CHECK(m.pairs_used > 0);
    CHECK(m.passes());
  }
  SUBCASE("U1 increases on the gamma > 0 centre before escape") {
    PerturbedSystem sys = example1({1.0, 0.1, 1.5, 0.5});
    AsymptoticSolution sol = branch(sys, Branch::SigmaPlus);
    IntegratorConfig c = cfg;
    c.t_end = 1e3;
    Trajectory tr = probe_trajectory(sys, sol, 0.001, c, {}, 400);
    MonotonicityResult m = lyapunov_monotonicity(sys, sol, tr, LyapunovKind::U1);
    CHECK(m.expected_sign == 1);
    CHECK(m.pairs_used > 0);
    CHECK(m.passes());
  }
  SUBCASE("centring on the truncated series blurs small offsets") {
    PerturbedSystem sys = example1({1.0, 0.1, 1.5, 0.5});
    AsymptoticSolution sol = branch(sys, Branch::SigmaPlus);
    IntegratorConfig c = cfg;
    c.t_end = 200.0;
    Trajectory tr = probe_trajectory(sys, sol, 0.001, c, {}, 400);
    MonotonicityOptions series;
    series.reference_match_time = 0.0;
    CHECK_FALSE(lyapunov_monotonicity(sys, sol, tr, LyapunovKind::U1, series).passes());
    CHECK(lyapunov_monotonicity(sys, sol, tr, LyapunovKind::U1).passes());
  }
  SUBCASE("the particular solution itself is below the resolution floor") {
    PerturbedSystem sys = example1({1.0, -0.5, 1.5, 0.5});
    AsymptoticSolution sol = branch(sys, Branch::SigmaPlus);
    const ReferencePath path(sys, sol, 10.0, 1e3);
    Trajectory tr;
    for (double t : log_spaced(1e3, 1e5, 50)) {
      tr.times.push_back(t);
      tr.states.push_back(path(t));
    }
    MonotonicityResult m = lyapunov_monotonicity(sys, sol, tr, LyapunovKind::U1);
    CHECK(m.passes());
  }
  SUBCASE("no sign for saddles and metastable branches") {
    PerturbedSystem sys = example2({0.0, 1.0, -2.25, 1.0});
    AsymptoticSolution minus = branch(sys, Branch::NuMinus);
    AsymptoticSolution plus = branch(sys, Branch::NuPlus);
    Trajectory tr = probe_trajectory(sys, plus, 0.01, cfg, {}, 50);
    CHECK_THROWS_AS((void)lyapunov_monotonicity(sys, minus, tr, LyapunovKind::U3), NotApplicable);
    CHECK_THROWS_AS((void)lyapunov_monotonicity(sys, plus, tr, LyapunovKind::U3), NotApplicable);
  }
  SUBCASE("leaving the neighbourhood") {
    PerturbedSystem sys = example2({0.0, 1.0, 1.0, 1.0});
    AsymptoticSolution sol = branch(sys, Branch::NuPlus);
    IntegratorConfig c = cfg;
    c.t_end = 1e3;
    Trajectory tr = probe_trajectory(sys, sol, 0.1, c, {}, 100);
    CHECK_THROWS_AS((void)lyapunov_monotonicity(sys, sol, tr, LyapunovKind::U3), NotApplicable);
  }
}

TEST_CASE("validate_branch summary") {
  PerturbedSystem sys = example2({0.0, 1.0, -3.0, 1.0});
  nlohmann::json j = validate_branch(sys, branch(sys, Branch::NuPlus), ValidationSettings{});
  CHECK(j["residual_order"]["passes"] == true);
  CHECK(j["probe"]["empirical_verdict"] == "consistent_stable");
  CHECK(j["probe"]["agrees"] == true);
  CHECK(j["lyapunov"]["kind"] == "U3");
  CHECK(j["lyapunov"]["passes"] == true);
}
