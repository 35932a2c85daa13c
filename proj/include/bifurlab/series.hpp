#pragma once

// Exact-coefficient polynomials and truncated power series on the grid
// t^(-k/den). Everything here is an immutable value type.

#include <boost/multiprecision/float128.hpp>

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bifurlab {

/// Extended-precision scalar used for series coefficients and residuals.
using Real = boost::multiprecision::float128;

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Univariate polynomial with sparse, zero-free storage.
class Poly1 {
 public:
  Poly1() = default;
  explicit Poly1(const std::map<int, double>& coeffs);

  static Poly1 constant(double c) { return Poly1({{0, c}}); }
  static Poly1 monomial(int degree, double c) { return Poly1({{degree, c}}); }

  /// Highest stored degree, or -1 for the zero polynomial.
  [[nodiscard]] int degree() const;
  [[nodiscard]] bool is_zero() const { return coeffs_.empty(); }
  [[nodiscard]] double coeff(int degree) const;
  [[nodiscard]] const std::map<int, double>& terms() const { return coeffs_; }

  template <class T>
  [[nodiscard]] T operator()(const T& x) const {
    T acc = T(0);
    int deg = degree();
    for (int d = deg; d >= 0; --d) {
      acc = acc * x + T(coeff(d));
    }
    return acc;
  }

  [[nodiscard]] Poly1 derivative(int order = 1) const;
  [[nodiscard]] Poly1 antiderivative() const;
  /// The polynomial z -> p(x0 + z).
  [[nodiscard]] Poly1 shifted(double x0) const;

  friend Poly1 operator+(const Poly1& a, const Poly1& b);
  friend Poly1 operator-(const Poly1& a, const Poly1& b);
  friend Poly1 operator*(const Poly1& a, const Poly1& b);
  friend Poly1 operator*(double s, const Poly1& a);
  friend bool operator==(const Poly1& a, const Poly1& b) = default;

 private:
  std::map<int, double> coeffs_;
};

/// Bivariate polynomial keyed by (degree in x, degree in y).
class Poly2 {
 public:
  using Key = std::pair<int, int>;

  Poly2() = default;
  explicit Poly2(const std::map<Key, double>& coeffs);
  /// Lifts p(x) to a polynomial in (x, y) with no y dependence.
  static Poly2 from_x(const Poly1& p);
  static Poly2 constant(double c) { return Poly2({{{0, 0}, c}}); }

  [[nodiscard]] bool is_zero() const { return coeffs_.empty(); }
  [[nodiscard]] double coeff(int dx, int dy) const;
  [[nodiscard]] const std::map<Key, double>& terms() const { return coeffs_; }
  [[nodiscard]] int total_degree() const;

  template <class T>
  [[nodiscard]] T operator()(const T& x, const T& y) const {
    T acc = T(0);
    for (const auto& [key, c] : coeffs_) {
      T term = T(c);
      for (int i = 0; i < key.first; ++i) term *= x;
      for (int j = 0; j < key.second; ++j) term *= y;
      acc += term;
    }
    return acc;
  }

  /// Raw mixed partial derivative d^ax/dx^ax d^ay/dy^ay (no factorial scaling).
  [[nodiscard]] Poly2 partial(int ax, int ay) const;
  /// Coefficients of p(x0 + u, y0 + v) as a polynomial in (u, v).
  [[nodiscard]] Poly2 shifted(double x0, double y0) const;
  /// Taylor coefficients of p about (x0, y0) computed in extended precision:
  /// entry (a, b) equals d^a_x d^b_y p(x0, y0) / (a! b!).
  [[nodiscard]] std::map<Key, Real> taylor(const Real& x0, const Real& y0) const;

  friend Poly2 operator+(const Poly2& a, const Poly2& b);
  friend Poly2 operator-(const Poly2& a, const Poly2& b);
  friend Poly2 operator*(const Poly2& a, const Poly2& b);
  friend Poly2 operator*(double s, const Poly2& a);
  friend bool operator==(const Poly2& a, const Poly2& b) = default;

 private:
  std::map<Key, double> coeffs_;
};

/// Raw partial derivative; Taylor factors 1/(ax! ay!) are the caller's job.
[[nodiscard]] inline Poly2 poly2_partial(const Poly2& p, int ax, int ay) {
  return p.partial(ax, ay);
}

/// Truncated series sum_{k=k_min}^{k_max} c_k t^(-k/den), known exactly
/// through grid index k_max. Terms above k_max are not represented.
class FracSeries {
 public:
  /// `coeffs[i]` is the coefficient of index k_min + i. Missing entries up
  /// to k_max are zero; entries beyond k_max are dropped.
  FracSeries(int den, int k_min, std::vector<Real> coeffs, int k_max);

  static FracSeries constant(int den, const Real& c, int k_max);
  static FracSeries zero(int den, int k_max) { return constant(den, Real(0), k_max); }
  /// c * t^(-k/den), known through k_max.
  static FracSeries monomial(int den, int k, const Real& c, int k_max);

  [[nodiscard]] int den() const { return den_; }
  [[nodiscard]] int k_min() const { return k_min_; }
  [[nodiscard]] int k_max() const { return k_max_; }
  /// Coefficient at grid index k; zero outside [k_min, k_max].
  [[nodiscard]] Real operator[](int k) const;
  [[nodiscard]] const std::vector<Real>& coeffs() const { return coeffs_; }

  /// Returns a copy with coefficient k replaced (k_min <= k <= k_max).
  [[nodiscard]] FracSeries with_coeff(int k, const Real& c) const;
  [[nodiscard]] FracSeries truncated(int k_max) const;
  /// Finite-sum value at time t > 0.
  [[nodiscard]] Real eval(const Real& t) const;

 private:
  int den_;
  int k_min_;
  int k_max_;
  std::vector<Real> coeffs_;
};

[[nodiscard]] FracSeries operator+(const FracSeries& a, const FracSeries& b);
[[nodiscard]] FracSeries operator-(const FracSeries& a, const FracSeries& b);
[[nodiscard]] FracSeries operator*(const Real& s, const FracSeries& a);

/// Cauchy product. The result is known through
/// min(a.k_max + b.k_min, b.k_max + a.k_min).
[[nodiscard]] FracSeries series_mul(const FracSeries& a, const FracSeries& b);

/// Multiplies by t^(-shift/den).
[[nodiscard]] FracSeries series_shift(const FracSeries& a, int shift);

/// d/dt of the series: index k maps to k + den with factor -k/den.
[[nodiscard]] FracSeries series_ddt(const FracSeries& a);

/// Series of p(x0 + xs(t), y0 + ys(t)). `xs` and `ys` are deviations: their
/// constant coefficients must vanish. Truncated to the common known order.
[[nodiscard]] FracSeries series_compose_poly2(const Poly2& p, const FracSeries& xs,
                                              const FracSeries& ys, const Real& x0,
                                              const Real& y0);

}  // namespace bifurlab
