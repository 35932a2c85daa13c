#pragma once

// The perturbed planar system
//
//   dx/dt =  y                 + sum_k t^(-k/q) F_k(x, y)
//   dy/dt = -(x^2 - lambda) w(x) + sum_k t^(-k/q) G_k(x, y)
//
// with a finite perturbation ladder k = 1..K.

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bifurlab/series.hpp"

namespace bifurlab {

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

using State = std::array<double, 2>;

class PerturbedSystem {
 public:
  /// Validates q >= 1, a nonempty ladder, and w > 0 at the limiting fixed
  /// points (+-sqrt(lambda) for lambda > 0, the origin for lambda = 0).
  /// The shorter ladder is padded with zero polynomials.
  PerturbedSystem(double lambda, int q, Poly1 w, std::vector<Poly2> F, std::vector<Poly2> G);

  [[nodiscard]] double lambda() const { return lambda_; }
  [[nodiscard]] int q() const { return q_; }
  [[nodiscard]] const Poly1& w() const { return w_; }
  [[nodiscard]] int k_pert() const { return static_cast<int>(F_.size()); }
  [[nodiscard]] const std::vector<Poly2>& F_ladder() const { return F_; }
  [[nodiscard]] const std::vector<Poly2>& G_ladder() const { return G_; }

  /// F_k and G_k for k >= 1; zero beyond the supplied ladder.
  [[nodiscard]] const Poly2& F(int k) const;
  [[nodiscard]] const Poly2& G(int k) const;

  /// (x^2 - lambda) w(x) as an explicit polynomial.
  [[nodiscard]] Poly1 potential_derivative() const;

  /// Limiting Hamiltonian y^2/2 + V(x) with V(0) = 0.
  [[nodiscard]] double hamiltonian(double x, double y) const;

  template <class T>
  [[nodiscard]] T vprime(const T& x) const {
    return (x * x - T(lambda_)) * w_(x);
  }

  /// Right-hand side at (x, y, t); throws DomainError for t <= 0.
  template <class T>
  [[nodiscard]] std::array<T, 2> rhs(const T& x, const T& y, const T& t) const {
    if (!(t > T(0))) throw DomainError("rhs: t must be positive");
    T fx = y;
    T fy = -vprime(x);
    const T neg_inv_q = T(-1) / T(q_);
    for (int k = 1; k <= k_pert(); ++k) {
      const Poly2& f = F_[static_cast<std::size_t>(k - 1)];
      const Poly2& g = G_[static_cast<std::size_t>(k - 1)];
      if (f.is_zero() && g.is_zero()) continue;
      using std::pow;
      T weight = pow(t, neg_inv_q * T(k));
      if (!f.is_zero()) fx += weight * f(x, y);
      if (!g.is_zero()) fy += weight * g(x, y);
    }
    return {fx, fy};
  }

  [[nodiscard]] State rhs(const State& s, double t) const { return rhs<double>(s[0], s[1], t); }

 private:
  double lambda_;
  int q_;
  Poly1 w_;
  std::vector<Poly2> F_;
  std::vector<Poly2> G_;
  Poly2 zero_;
};

/// Structural indices that select the applicable constructions and theorems.
struct AssumptionProfile {
  int n = 0;              ///< first index with F_n or G_n nonzero
  bool as0_holds = false; ///< n <= q
  std::optional<int> m;   ///< first l < n with G_{n+l}(0,0) != 0
  bool as1_holds = false;
  bool as2_holds = false;
  std::optional<int> h;   ///< first k - n >= 0 with dF_k/dx + dG_k/dy != 0
  bool hamiltonian_pert = false;
  bool delta_nq = false;  ///< n == q (exact integer comparison)

  friend bool operator==(const AssumptionProfile&, const AssumptionProfile&) = default;
};

/// True when every F_k and G_k is the zero polynomial.
[[nodiscard]] bool is_unperturbed(const PerturbedSystem& sys);

/// Throws ModelError("unperturbed system") when every ladder entry vanishes.
[[nodiscard]] AssumptionProfile detect_profile(const PerturbedSystem& sys);

/// Entry j (0-based) is the j-th derivative of (x^2 - lambda) w(x) at x0.
[[nodiscard]] std::vector<double> v_derivatives(const PerturbedSystem& sys, double x0, int up_to);

/// True when dF/dx + dG/dy vanishes identically at coefficient level.
[[nodiscard]] bool divergence_free(const Poly2& F, const Poly2& G);

}  // namespace bifurlab
