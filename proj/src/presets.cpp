#include "bifurlab/presets.hpp"

#include <cmath>
#include <numeric>

namespace bifurlab {

std::pair<int, int> kappa_as_ratio(double kappa) {
  if (!(kappa > 0) || !std::isfinite(kappa)) throw ModelError("kappa must be positive");
  for (int q = 1; q <= 1000; ++q) {
    double n = std::round(kappa * q);
    if (n >= 1 && std::abs(kappa * q - n) < 1e-9 * q) {
      return {static_cast<int>(n), q};
    }
  }
  throw ModelError("kappa must equal n/q for integers n, q (q <= 1000)");
}

PerturbedSystem example1(const Example1Params& p) {
  auto [n, q] = kappa_as_ratio(p.kappa);
  std::vector<Poly2> G(static_cast<std::size_t>(n));
  G[static_cast<std::size_t>(n - 1)] = Poly2({{{0, 1}, p.B}, {{0, 0}, p.C}});
  return PerturbedSystem(p.lambda, q, Poly1::constant(1.0), std::vector<Poly2>(G.size()), G);
}

PerturbedSystem example2(const Example2Params& p) {
  if (p.C == 0.0) throw ModelError("example2 requires C != 0");
  Poly2 G1({{{1, 0}, p.A}, {{0, 1}, p.B}, {{2, 0}, 1.0}, {{0, 2}, 1.0}, {{1, 1}, 1.0}});
  Poly2 G2 = Poly2::constant(p.C);
  return PerturbedSystem(p.lambda, 1, Poly1({{0, 1.0}, {1, 1.0}}), {Poly2{}, Poly2{}}, {G1, G2});
}

}  // namespace bifurlab
