#pragma once

// The two worked examples: x'' + x^2 - lambda = t^(-kappa) (B x' + C), and
// the w(x) = 1 + x system with G_1 = A x + B y + x^2 + y^2 + x y, G_2 = C.

#include <utility>

#include "bifurlab/model.hpp"

namespace bifurlab {

struct Example1Params {
  double lambda = 1.0;
  double B = 0.0;
  double C = 1.5;
  double kappa = 0.5;
};

struct Example2Params {
  double lambda = 0.0;
  double A = 1.0;
  double B = 0.0;
  double C = 1.0;
};

/// Writes kappa as n/q with the smallest q <= 1000; throws ModelError if none.
[[nodiscard]] std::pair<int, int> kappa_as_ratio(double kappa);

[[nodiscard]] PerturbedSystem example1(const Example1Params& p);
[[nodiscard]] PerturbedSystem example2(const Example2Params& p);

}  // namespace bifurlab
