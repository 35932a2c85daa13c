#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "bifurlab/series.hpp"
#include "support.hpp"

using namespace bifurlab;

namespace {

FracSeries random_series(std::mt19937_64& rng, int den, int k_min, int k_max) {
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  std::vector<Real> v;
  for (int k = k_min; k <= k_max; ++k) v.push_back(Real(c(rng)));
  return FracSeries(den, k_min, v, k_max);
}

void require_same_through(const FracSeries& a, const FracSeries& b, int k_hi, double tol = 1e-28) {
  for (int k = std::min(a.k_min(), b.k_min()); k <= k_hi; ++k) {
    CHECK(static_cast<double>(abs(a[k] - b[k])) <= tol);
  }
}

}  // namespace

TEST_CASE("Poly1 stores no zeros and reports the zero polynomial") {
  Poly1 p({{0, 1.0}, {3, 0.0}, {2, -2.0}});
  CHECK(p.degree() == 2);
  CHECK(p.terms().size() == 2);
  CHECK(Poly1().degree() == -1);
  CHECK(Poly1().is_zero());
  CHECK((p - p).is_zero());
}

TEST_CASE("Poly1 calculus") {
  Poly1 p({{0, 1.0}, {1, 2.0}, {3, 4.0}});
  CHECK(p.derivative() == Poly1({{0, 2.0}, {2, 12.0}}));
  CHECK(p.antiderivative().derivative() == p);
  // p(1 + z) at z = 0.5 equals p(1.5).
  CHECK(p.shifted(1.0)(0.5) == doctest::Approx(p(1.5)).epsilon(1e-15));
}

TEST_CASE("poly2_partial examples") {
  Poly2 sq({{{2, 0}, 1.0}, {{0, 2}, 1.0}});
  CHECK(poly2_partial(sq, 1, 0) == Poly2({{{1, 0}, 2.0}}));
  Poly2 xy({{{1, 1}, 1.0}});
  CHECK(poly2_partial(xy, 1, 1) == Poly2::constant(1.0));
  // g = x^2 + y^2 + x y; d/dy at (sqrt(lambda), 0) is sqrt(lambda).
  Poly2 g({{{2, 0}, 1.0}, {{0, 2}, 1.0}, {{1, 1}, 1.0}});
  for (double lambda : {0.25, 1.0, 2.0}) {
    CHECK(poly2_partial(g, 0, 1)(std::sqrt(lambda), 0.0) == doctest::Approx(std::sqrt(lambda)));
  }
}

TEST_CASE("poly2_partial derivatives commute") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    Poly2 p = testsupport::random_poly2(rng, 5);
    CHECK(p.partial(1, 0).partial(0, 1) == p.partial(0, 1).partial(1, 0));
    CHECK(p.partial(2, 1) == p.partial(0, 1).partial(2, 0));
  }
}

TEST_CASE("Poly2 Taylor coefficients match shifted polynomial") {
  std::mt19937_64 rng(11);
  Poly2 p = testsupport::random_poly2(rng, 4);
  const auto tay = p.taylor(Real(0.3), Real(-0.7));
  const Poly2 sh = p.shifted(0.3, -0.7);
  for (const auto& [key, c] : tay) {
    CHECK(static_cast<double>(c) == doctest::Approx(sh.coeff(key.first, key.second)).epsilon(1e-12));
  }
}

TEST_CASE("series_mul examples") {
  SUBCASE("t^-1 squared on the half grid") {
    FracSeries a = FracSeries::monomial(2, 2, Real(1), 2);
    FracSeries r = series_mul(a, a);
    CHECK(r.k_max() == 4);
    CHECK(r[4] == Real(1));
    CHECK(r[2] == Real(0));
  }
  SUBCASE("(1 + t^-1/2)(1 - t^-1/2)") {
    // Both factors known exactly through index 2 (zero there).
    FracSeries a(2, 0, {Real(1), Real(1)}, 2);
    FracSeries b(2, 0, {Real(1), Real(-1)}, 2);
    FracSeries r = series_mul(a, b);
    CHECK(r.k_max() == 2);
    CHECK(r[0] == Real(1));
    CHECK(r[1] == Real(0));
    CHECK(r[2] == Real(-1));
  }
  SUBCASE("leading coefficient of a product") {
    FracSeries a(1, 1, {Real(2), Real(3)}, 2);
    FracSeries b(1, 1, {Real(5), Real(7)}, 2);
    FracSeries r = series_mul(a, b);
    CHECK(r.k_min() == 2);
    CHECK(r[2] == Real(10));
    // Known through min(2 + 1, 2 + 1).
    CHECK(r.k_max() == 3);
    CHECK(r[3] == Real(2 * 7 + 3 * 5));
  }
}

TEST_CASE("series_mul truncation is pessimistic") {
  FracSeries a(1, 0, {Real(1), Real(1)}, 5);
  FracSeries b(1, 2, {Real(1)}, 3);
  // a known through 5, b through 3 with k_min 2: product known through
  // min(5 + 2, 3 + 0).
  CHECK(series_mul(a, b).k_max() == 3);
}

TEST_CASE("series_mul is commutative and associative") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    FracSeries a = random_series(rng, 3, 0, 8);
    FracSeries b = random_series(rng, 3, 1, 7);
    FracSeries c = random_series(rng, 3, 2, 9);
    FracSeries ab = series_mul(a, b), ba = series_mul(b, a);
    CHECK(ab.k_max() == ba.k_max());
    require_same_through(ab, ba, ab.k_max(), 0.0);
    FracSeries l = series_mul(ab, c), r = series_mul(a, series_mul(b, c));
    const int top = std::min(l.k_max(), r.k_max());
    require_same_through(l, r, top);
  }
}

TEST_CASE("series_ddt examples") {
  FracSeries a = FracSeries::monomial(2, 1, Real(3), 4);
  FracSeries d = series_ddt(a);
  CHECK(d[3] == Real(-1.5));
  CHECK(d.k_max() == 6);
  FracSeries c = FracSeries::constant(2, Real(5), 4);
  FracSeries dc = series_ddt(c);
  for (int k = dc.k_min(); k <= dc.k_max(); ++k) CHECK(dc[k] == Real(0));
  // y_q t^(-1) on a q grid moves q indices up.
  const int q = 3;
  FracSeries y = FracSeries::monomial(q, q, Real(2), 8);
  CHECK(series_ddt(y)[2 * q] == Real(-2));
}

TEST_CASE("series_ddt obeys the Leibniz rule") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    FracSeries a = random_series(rng, 2, 0, 7);
    FracSeries b = random_series(rng, 2, 1, 6);
    FracSeries lhs = series_ddt(series_mul(a, b));
    FracSeries rhs = series_mul(series_ddt(a), b) + series_mul(a, series_ddt(b));
    require_same_through(lhs, rhs, std::min(lhs.k_max(), rhs.k_max()));
  }
}

TEST_CASE("series_compose_poly2 examples") {
  SUBCASE("(1 + xi)^2 - 1") {
    const Real x1 = Real(0.7);
    Poly2 p({{{2, 0}, 1.0}, {{0, 0}, -1.0}});
    FracSeries xs = FracSeries::monomial(2, 1, x1, 4);
    FracSeries ys = FracSeries::zero(2, 4);
    FracSeries r = series_compose_poly2(p, xs, ys, Real(1), Real(0));
    CHECK(static_cast<double>(abs(r[0])) < 1e-30);
    CHECK(static_cast<double>(abs(r[1] - 2 * x1)) < 1e-30);
    CHECK(static_cast<double>(abs(r[2] - x1 * x1)) < 1e-30);
    CHECK(static_cast<double>(abs(r[3])) < 1e-30);
  }
  SUBCASE("constant") {
    FracSeries xs = FracSeries::monomial(1, 1, Real(1), 3);
    FracSeries r = series_compose_poly2(Poly2::constant(4.0), xs, xs, Real(0.5), Real(0.5));
    CHECK(r[0] == Real(4));
    for (int k = 1; k <= r.k_max(); ++k) CHECK(r[k] == Real(0));
  }
  SUBCASE("B y + C") {
    const double B = -0.5, C = 1.5;
    const Real y2 = Real(0.25);
    Poly2 p({{{0, 1}, B}, {{0, 0}, C}});
    FracSeries xs = FracSeries::zero(2, 4);
    FracSeries ys = FracSeries::monomial(2, 2, y2, 4);
    FracSeries r = series_compose_poly2(p, xs, ys, Real(0), Real(0));
    CHECK(r[0] == Real(C));
    CHECK(r[2] == Real(B) * y2);
  }
}

TEST_CASE("series_compose_poly2 agrees with direct evaluation to the neglected order") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const int den = 2, k_max = 6;
    Poly2 p = testsupport::random_poly2(rng, 3);
    FracSeries xs = random_series(rng, den, 1, k_max);
    FracSeries ys = random_series(rng, den, 1, k_max);
    const Real x0 = Real(0.4), y0 = Real(-0.3);
    FracSeries comp = series_compose_poly2(p, xs, ys, x0, y0);
    CHECK(comp.k_max() == k_max);
    std::vector<double> ts, errs;
    for (double t : {1e4, 1e5, 1e6, 1e7}) {
      const Real tt = Real(t);
      const Real direct = p(x0 + xs.eval(tt), y0 + ys.eval(tt));
      ts.push_back(t);
      errs.push_back(static_cast<double>(abs(direct - comp.eval(tt))));
    }
    // First neglected index is k_max + 1.
    CHECK(testsupport::loglog_slope(ts, errs) == doctest::Approx(-(k_max + 1.0) / den).epsilon(0.05));
  }
}

TEST_CASE("FracSeries rejects inconsistent grids") {
  CHECK_THROWS_AS(FracSeries(0, 0, {}, 1), GridError);
  CHECK_THROWS_AS(FracSeries(2, 3, {}, 1), GridError);
  FracSeries a = FracSeries::constant(2, Real(1), 3);
  FracSeries b = FracSeries::constant(3, Real(1), 3);
  CHECK_THROWS_AS((void)(a + b), GridError);
}
