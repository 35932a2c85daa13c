#include "bifurlab/model.hpp"

#include <algorithm>

namespace bifurlab {

PerturbedSystem::PerturbedSystem(double lambda, int q, Poly1 w, std::vector<Poly2> F,
                                 std::vector<Poly2> G)
    : lambda_(lambda), q_(q), w_(std::move(w)), F_(std::move(F)), G_(std::move(G)) {
  if (!std::isfinite(lambda_)) throw ModelError("lambda must be finite");
  if (q_ < 1) throw ModelError("q must be a positive integer");
  std::size_t k = std::max(F_.size(), G_.size());
  if (k == 0) throw ModelError("perturbation ladder must have at least one entry");
  F_.resize(k);
  G_.resize(k);
  auto require_positive = [this](double x) {
    if (!(w_(x) > 0.0)) {
      throw ModelError("w must be positive at the limiting fixed point x = " + std::to_string(x));
    }
  };
  if (lambda_ > 0) {
    require_positive(std::sqrt(lambda_));
    require_positive(-std::sqrt(lambda_));
  } else if (lambda_ == 0) {
    require_positive(0.0);
  }
}

const Poly2& PerturbedSystem::F(int k) const {
  if (k < 1 || k > k_pert()) return zero_;
  return F_[static_cast<std::size_t>(k - 1)];
}

const Poly2& PerturbedSystem::G(int k) const {
  if (k < 1 || k > k_pert()) return zero_;
  return G_[static_cast<std::size_t>(k - 1)];
}

Poly1 PerturbedSystem::potential_derivative() const {
  return Poly1({{2, 1.0}, {0, -lambda_}}) * w_;
}

double PerturbedSystem::hamiltonian(double x, double y) const {
  return 0.5 * y * y + potential_derivative().antiderivative()(x);
}

bool divergence_free(const Poly2& F, const Poly2& G) {
  Poly2 dF = F.partial(1, 0);
  Poly2 dG = G.partial(0, 1);
  std::map<Poly2::Key, std::pair<double, double>> terms;
  for (const auto& [k, c] : dF.terms()) terms[k].first = c;
  for (const auto& [k, c] : dG.terms()) terms[k].second = c;
  for (const auto& [k, ab] : terms) {
    double scale = std::max(std::abs(ab.first), std::abs(ab.second));
    if (std::abs(ab.first + ab.second) > 1e-14 * scale) return false;
  }
  return true;
}

bool is_unperturbed(const PerturbedSystem& sys) {
  for (int k = 1; k <= sys.k_pert(); ++k) {
    if (!sys.F(k).is_zero() || !sys.G(k).is_zero()) return false;
  }
  return true;
}

AssumptionProfile detect_profile(const PerturbedSystem& sys) {
  AssumptionProfile p;
  const int K = sys.k_pert();
  int n = 0;
  for (int k = 1; k <= K; ++k) {
    if (!sys.F(k).is_zero() || !sys.G(k).is_zero()) {
      n = k;
      break;
    }
  }
  if (n == 0) throw ModelError("unperturbed system: every F_k and G_k vanishes");
  p.n = n;
  p.as0_holds = n <= sys.q();
  p.delta_nq = n == sys.q();

  for (int l = 0; l < n; ++l) {
    if (sys.G(n + l).coeff(0, 0) != 0.0) {
      p.m = l;
      break;
    }
  }
  p.as1_holds = p.m.has_value();

  if (!p.as1_holds) {
    const double delta = p.delta_nq ? 1.0 : 0.0;
    double combo = sys.G(2 * n).coeff(0, 0) -
                   sys.F(n).coeff(0, 0) * (sys.G(n).coeff(0, 1) + delta);
    p.as2_holds = combo != 0.0;
  }

  for (int k = n; k <= K; ++k) {
    if (!divergence_free(sys.F(k), sys.G(k))) {
      p.h = k - n;
      break;
    }
  }
  p.hamiltonian_pert = !p.h.has_value();
  return p;
}

std::vector<double> v_derivatives(const PerturbedSystem& sys, double x0, int up_to) {
  if (up_to < 1) throw std::invalid_argument("v_derivatives: up_to must be >= 1");
  std::vector<double> out;
  Poly1 p = sys.potential_derivative();
  for (int j = 0; j < up_to; ++j) {
    out.push_back(p(x0));
    p = p.derivative();
  }
  return out;
}

}  // namespace bifurlab
