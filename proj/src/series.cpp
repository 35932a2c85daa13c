#include "bifurlab/series.hpp"

#include <algorithm>
#include <cmath>

namespace bifurlab {

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double falling(int n, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= n - i;
  return r;
}

template <class Map>
void drop_zeros(Map& m) {
  std::erase_if(m, [](const auto& kv) { return kv.second == 0.0; });
}

}  // namespace

// ---------------------------------------------------------------- Poly1

Poly1::Poly1(const std::map<int, double>& coeffs) : coeffs_(coeffs) {
  for (const auto& [d, c] : coeffs_) {
    if (d < 0) throw std::invalid_argument("Poly1: negative degree");
    (void)c;
  }
  drop_zeros(coeffs_);
}

int Poly1::degree() const { return coeffs_.empty() ? -1 : coeffs_.rbegin()->first; }

double Poly1::coeff(int degree) const {
  auto it = coeffs_.find(degree);
  return it == coeffs_.end() ? 0.0 : it->second;
}

Poly1 Poly1::derivative(int order) const {
  std::map<int, double> out;
  for (const auto& [d, c] : coeffs_) {
    if (d >= order) out[d - order] += c * falling(d, order);
  }
  return Poly1(out);
}

Poly1 Poly1::antiderivative() const {
  std::map<int, double> out;
  for (const auto& [d, c] : coeffs_) out[d + 1] = c / (d + 1);
  return Poly1(out);
}

Poly1 Poly1::shifted(double x0) const {
  std::map<int, double> out;
  for (const auto& [d, c] : coeffs_) {
    for (int j = 0; j <= d; ++j) out[j] += c * binomial(d, j) * std::pow(x0, d - j);
  }
  return Poly1(out);
}

Poly1 operator+(const Poly1& a, const Poly1& b) {
  auto out = a.coeffs_;
  for (const auto& [d, c] : b.coeffs_) out[d] += c;
  return Poly1(out);
}

Poly1 operator-(const Poly1& a, const Poly1& b) { return a + (-1.0) * b; }

Poly1 operator*(const Poly1& a, const Poly1& b) {
  std::map<int, double> out;
  for (const auto& [da, ca] : a.coeffs_)
    for (const auto& [db, cb] : b.coeffs_) out[da + db] += ca * cb;
  return Poly1(out);
}

Poly1 operator*(double s, const Poly1& a) {
  auto out = a.coeffs_;
  for (auto& [d, c] : out) c *= s;
  return Poly1(out);
}

// ---------------------------------------------------------------- Poly2

Poly2::Poly2(const std::map<Key, double>& coeffs) : coeffs_(coeffs) {
  for (const auto& [k, c] : coeffs_) {
    if (k.first < 0 || k.second < 0) throw std::invalid_argument("Poly2: negative degree");
    (void)c;
  }
  drop_zeros(coeffs_);
}

Poly2 Poly2::from_x(const Poly1& p) {
  std::map<Key, double> out;
  for (const auto& [d, c] : p.terms()) out[{d, 0}] = c;
  return Poly2(out);
}

double Poly2::coeff(int dx, int dy) const {
  auto it = coeffs_.find({dx, dy});
  return it == coeffs_.end() ? 0.0 : it->second;
}

int Poly2::total_degree() const {
  int deg = -1;
  for (const auto& [k, c] : coeffs_) deg = std::max(deg, k.first + k.second);
  return deg;
}

Poly2 Poly2::partial(int ax, int ay) const {
  std::map<Key, double> out;
  for (const auto& [k, c] : coeffs_) {
    if (k.first >= ax && k.second >= ay) {
      out[{k.first - ax, k.second - ay}] += c * falling(k.first, ax) * falling(k.second, ay);
    }
  }
  return Poly2(out);
}

Poly2 Poly2::shifted(double x0, double y0) const {
  std::map<Key, double> out;
  for (const auto& [k, c] : coeffs_) {
    for (int a = 0; a <= k.first; ++a) {
      double cx = binomial(k.first, a) * std::pow(x0, k.first - a);
      for (int b = 0; b <= k.second; ++b) {
        out[{a, b}] += c * cx * binomial(k.second, b) * std::pow(y0, k.second - b);
      }
    }
  }
  return Poly2(out);
}

std::map<Poly2::Key, Real> Poly2::taylor(const Real& x0, const Real& y0) const {
  std::map<Key, Real> out;
  for (const auto& [k, c] : coeffs_) {
    for (int a = 0; a <= k.first; ++a) {
      Real cx = Real(c) * Real(binomial(k.first, a)) * pow(x0, k.first - a);
      for (int b = 0; b <= k.second; ++b) {
        out[{a, b}] += cx * Real(binomial(k.second, b)) * pow(y0, k.second - b);
      }
    }
  }
  std::erase_if(out, [](const auto& kv) { return kv.second == 0; });
  return out;
}

Poly2 operator+(const Poly2& a, const Poly2& b) {
  auto out = a.coeffs_;
  for (const auto& [k, c] : b.coeffs_) out[k] += c;
  return Poly2(out);
}

Poly2 operator-(const Poly2& a, const Poly2& b) { return a + (-1.0) * b; }

Poly2 operator*(const Poly2& a, const Poly2& b) {
  std::map<Poly2::Key, double> out;
  for (const auto& [ka, ca] : a.coeffs_)
    for (const auto& [kb, cb] : b.coeffs_)
      out[{ka.first + kb.first, ka.second + kb.second}] += ca * cb;
  return Poly2(out);
}

Poly2 operator*(double s, const Poly2& a) {
  auto out = a.coeffs_;
  for (auto& [k, c] : out) c *= s;
  return Poly2(out);
}

// ----------------------------------------------------------- FracSeries

FracSeries::FracSeries(int den, int k_min, std::vector<Real> coeffs, int k_max)
    : den_(den), k_min_(k_min), k_max_(k_max), coeffs_(std::move(coeffs)) {
  if (den < 1) throw GridError("FracSeries: base denominator must be >= 1");
  if (k_min < 0) throw GridError("FracSeries: k_min must be >= 0");
  if (k_min > k_max) throw GridError("FracSeries: k_min exceeds k_max");
  coeffs_.resize(static_cast<std::size_t>(k_max - k_min + 1), Real(0));
}

FracSeries FracSeries::constant(int den, const Real& c, int k_max) {
  return FracSeries(den, 0, {c}, k_max);
}

FracSeries FracSeries::monomial(int den, int k, const Real& c, int k_max) {
  if (k > k_max) return FracSeries(den, k_max, {}, k_max);
  return FracSeries(den, k, {c}, k_max);
}

Real FracSeries::operator[](int k) const {
  if (k < k_min_ || k > k_max_) return Real(0);
  return coeffs_[static_cast<std::size_t>(k - k_min_)];
}

FracSeries FracSeries::with_coeff(int k, const Real& c) const {
  if (k < k_min_ || k > k_max_) throw GridError("FracSeries::with_coeff: index out of range");
  FracSeries out = *this;
  out.coeffs_[static_cast<std::size_t>(k - k_min_)] = c;
  return out;
}

FracSeries FracSeries::truncated(int k_max) const {
  int km = std::min(k_max, k_max_);
  if (km < k_min_) return FracSeries(den_, km < 0 ? 0 : km, {}, km < 0 ? 0 : km);
  return FracSeries(den_, k_min_, coeffs_, km);
}

Real FracSeries::eval(const Real& t) const {
  // Horner in s = t^(-1/den).
  Real s = pow(t, Real(-1) / Real(den_));
  Real acc = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + *it;
  return acc * pow(s, k_min_);
}

namespace {

void require_same_grid(const FracSeries& a, const FracSeries& b) {
  if (a.den() != b.den()) {
    throw GridError("series grids differ: den " + std::to_string(a.den()) + " vs " +
                    std::to_string(b.den()));
  }
}

FracSeries combine(const FracSeries& a, const FracSeries& b, const Real& sb) {
  require_same_grid(a, b);
  int k_min = std::min(a.k_min(), b.k_min());
  int k_max = std::min(a.k_max(), b.k_max());
  if (k_min > k_max) k_min = k_max;
  std::vector<Real> c(static_cast<std::size_t>(k_max - k_min + 1));
  for (int k = k_min; k <= k_max; ++k) c[static_cast<std::size_t>(k - k_min)] = a[k] + sb * b[k];
  return FracSeries(a.den(), k_min, std::move(c), k_max);
}

}  // namespace

FracSeries operator+(const FracSeries& a, const FracSeries& b) { return combine(a, b, Real(1)); }

FracSeries operator-(const FracSeries& a, const FracSeries& b) { return combine(a, b, Real(-1)); }

FracSeries operator*(const Real& s, const FracSeries& a) {
  std::vector<Real> c = a.coeffs();
  for (auto& v : c) v *= s;
  return FracSeries(a.den(), a.k_min(), std::move(c), a.k_max());
}

FracSeries series_mul(const FracSeries& a, const FracSeries& b) {
  require_same_grid(a, b);
  int k_min = a.k_min() + b.k_min();
  int k_max = std::min(a.k_max() + b.k_min(), b.k_max() + a.k_min());
  std::vector<Real> c(static_cast<std::size_t>(k_max - k_min + 1), Real(0));
  for (int i = a.k_min(); i <= a.k_max(); ++i) {
    Real ai = a[i];
    if (ai == 0) continue;
    for (int j = b.k_min(); j <= b.k_max() && i + j <= k_max; ++j) {
      c[static_cast<std::size_t>(i + j - k_min)] += ai * b[j];
    }
  }
  return FracSeries(a.den(), k_min, std::move(c), k_max);
}

FracSeries series_shift(const FracSeries& a, int shift) {
  return FracSeries(a.den(), a.k_min() + shift, a.coeffs(), a.k_max() + shift);
}

FracSeries series_ddt(const FracSeries& a) {
  std::vector<Real> c = a.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) {
    int k = a.k_min() + static_cast<int>(i);
    c[i] *= Real(-k) / Real(a.den());
  }
  return FracSeries(a.den(), a.k_min() + a.den(), std::move(c), a.k_max() + a.den());
}

namespace {

// Drops a (vanishing) constant term so that the series starts at index >= 1.
FracSeries as_deviation(const FracSeries& s, const char* name) {
  if (s.k_min() > 0) return s;
  if (s[0] != 0) {
    throw std::invalid_argument(std::string("series_compose_poly2: ") + name +
                                " has a nonzero constant term");
  }
  if (s.k_max() < 1) return FracSeries(s.den(), s.k_max() + 1, {}, s.k_max() + 1);
  std::vector<Real> c(s.coeffs().begin() + 1, s.coeffs().end());
  return FracSeries(s.den(), 1, std::move(c), s.k_max());
}

}  // namespace

FracSeries series_compose_poly2(const Poly2& p, const FracSeries& xs, const FracSeries& ys,
                                const Real& x0, const Real& y0) {
  require_same_grid(xs, ys);
  const int den = xs.den();
  const int k_max = std::min(xs.k_max(), ys.k_max());
  FracSeries xi = as_deviation(xs, "xs");
  FracSeries eta = as_deviation(ys, "ys");

  auto taylor = p.taylor(x0, y0);
  int max_a = 0;
  int max_b = 0;
  for (const auto& [key, c] : taylor) {
    max_a = std::max(max_a, key.first);
    max_b = std::max(max_b, key.second);
  }
  // Powers are only needed while their leading index stays within k_max.
  std::vector<FracSeries> xpow{FracSeries::constant(den, Real(1), k_max)};
  std::vector<FracSeries> ypow{FracSeries::constant(den, Real(1), k_max)};
  for (int a = 1; a <= max_a && xpow.back().k_min() + xi.k_min() <= k_max; ++a) {
    xpow.push_back(series_mul(xpow.back(), xi).truncated(k_max));
  }
  for (int b = 1; b <= max_b && ypow.back().k_min() + eta.k_min() <= k_max; ++b) {
    ypow.push_back(series_mul(ypow.back(), eta).truncated(k_max));
  }

  FracSeries out = FracSeries::zero(den, k_max);
  for (const auto& [key, c] : taylor) {
    auto [a, b] = key;
    if (a >= static_cast<int>(xpow.size()) || b >= static_cast<int>(ypow.size())) continue;
    if (xpow[a].k_min() + ypow[b].k_min() > k_max) continue;
    out = out + c * series_mul(xpow[a], ypow[b]).truncated(k_max);
  }
  return out.truncated(k_max);
}

}  // namespace bifurlab
