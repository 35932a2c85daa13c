#pragma once

// Truncated particular solutions tending to the limiting fixed points:
//
//   Sigma: x = sigma + sum_{k>=1} x_k t^(-k/q),  y = sum y_k t^(-k/q)      (lambda > 0)
//   Mu:    x = sum_{k>=n+m} x_k t^(-k/2q),      y = sum_{k>=2n} y_k ...   (lambda = 0)
//   Nu:    x = sum_{k>=n} x_k t^(-k/q),          y = sum_{k>=n} y_k ...    (lambda = 0)
//
// Coefficients are produced by substituting the known prefix into the
// system and solving the lowest unresolved order.

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "bifurlab/model.hpp"
#include "bifurlab/series.hpp"

namespace bifurlab {

enum class Branch { SigmaPlus, SigmaMinus, MuPlus, MuMinus, NuPlus, NuMinus };

[[nodiscard]] std::string to_string(Branch b);
[[nodiscard]] Branch branch_from_string(const std::string& s);
[[nodiscard]] int branch_sign(Branch b);
[[nodiscard]] bool is_centre_type(Branch b);

/// Construction preconditions not met (wrong lambda, assumption violated,
/// degenerate discriminant, ill-conditioned order system).
class AssumptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LeadingData {
  int x_index = 0;
  Real x_value = 0;  ///< sigma, +-mu, or nu_+-
  int y_index = 0;
  Real y_value = 0;  ///< -F_n(0,0) (0 for sigma branches)
};

struct AsymptoticSolution {
  Branch branch;
  int grid_den;       ///< q, or 2q for the mu branches
  FracSeries x;       ///< x coefficients on the grid (sigma included at index 0)
  FracSeries y;
  int order;          ///< highest computed x grid index
  LeadingData leading;
  /// Per recursion step k = 1..: the right-hand sides of the scalar order
  /// equations, i.e. the x-equation forcing and the y-coefficient value.
  std::vector<Real> x_forcing;
  std::vector<Real> y_forcing;
  /// Largest |coefficient| of the substituted residual at orders the
  /// construction claims to have solved.
  double solved_order_defect = 0.0;
};

enum class EscapeRegime { MuMissing, NuMissing };

struct EscapeReport {
  EscapeRegime regime;
  double theta1;
  double theta2;
  double x_exponent;   ///< x = (shift + theta1 a) t^(-x_exponent)
  double y_exponent;   ///< y = ... + sqrt(theta1^3 w(0)) b t^(-y_exponent)
  double tau_exponent; ///< tau = theta2 sqrt(theta1 w(0)) t^(tau_exponent)
  double x_shift;      ///< dG_n/dx(0,0)/(2 w(0)) for NuMissing, 0 otherwise
  std::string rescaled_limit = "da/dtau = b, db/dtau = -(a^2 + 1)";
};

[[nodiscard]] std::string to_string(EscapeRegime r);

using Construction = std::variant<AsymptoticSolution, EscapeReport>;

/// Highest x grid index used when no order is requested: leading index
/// plus 2q + n grid steps.
[[nodiscard]] int default_order(const PerturbedSystem& sys, Branch branch);

[[nodiscard]] AsymptoticSolution build_sigma(const PerturbedSystem& sys, int sign, int order);
[[nodiscard]] Construction build_mu(const PerturbedSystem& sys, int sign, int order);
[[nodiscard]] Construction build_nu(const PerturbedSystem& sys, int sign, int order);

/// Dispatches on the branch; `order` < 0 selects default_order.
[[nodiscard]] Construction build_branch(const PerturbedSystem& sys, Branch branch, int order = -1);

/// Branches worth attempting for this system: sigma for lambda > 0, mu or nu
/// for lambda = 0 depending on which assumption holds.
[[nodiscard]] std::vector<Branch> applicable_branches(const PerturbedSystem& sys);

/// Discriminant of the nu leading-order quadratic.
[[nodiscard]] double delta_n(const PerturbedSystem& sys, const AssumptionProfile& profile);

[[nodiscard]] std::array<Real, 2> eval_asym_ext(const AsymptoticSolution& sol, const Real& t);
[[nodiscard]] std::array<Real, 2> eval_asym_ddt_ext(const AsymptoticSolution& sol, const Real& t);
[[nodiscard]] State eval_asym(const AsymptoticSolution& sol, double t);

/// (dx/dt, dy/dt) of the truncated series minus the system right-hand side,
/// evaluated in extended precision.
[[nodiscard]] std::array<double, 2> residual(const AsymptoticSolution& sol,
                                             const PerturbedSystem& sys, double t);

}  // namespace bifurlab
