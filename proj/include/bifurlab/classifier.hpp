#pragma once

// Linearization eigenvalues, the scalar stability criteria, and the
// verdict table for every particular-solution branch.

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

#include "bifurlab/asymptotics.hpp"
#include "bifurlab/model.hpp"

namespace bifurlab {

struct CriterionSet {
  std::optional<double> gamma_nh;   ///< dF_{n+h}/dx + dG_{n+h}/dy at (sqrt(lambda), 0)
  std::optional<double> d_n;        ///< Hamiltonian-perturbation criterion
  std::optional<double> gamma_n0;   ///< dF_n/dx + dG_n/dy at the origin (lambda = 0)
  std::optional<double> alpha_nm;
  std::optional<double> beta_n;
  std::optional<double> delta_n;
  std::optional<double> omega1_sq;  ///< 2 sqrt(lambda) w(sqrt(lambda))
  std::optional<double> omega2_sq;  ///< 2 w(0) mu
  std::optional<double> omega3_sq;  ///< sqrt(Delta_n)

  friend bool operator==(const CriterionSet&, const CriterionSet&) = default;
};

enum class Verdict { Unstable, Stable, AsymptoticallyStable, Metastable, Undetermined };

[[nodiscard]] std::string to_string(Verdict v);

struct StabilityVerdict {
  Branch branch;
  Verdict verdict;
  std::string theorem;  ///< name of the criterion that decides the verdict
  CriterionSet criteria;
  std::string notes;

  friend bool operator==(const StabilityVerdict&, const StabilityVerdict&) = default;
};

struct EigenPair {
  std::complex<double> e_plus;
  std::complex<double> e_minus;
  double trace;
  double determinant;
  double discriminant;
};

/// Raised when the requested branch does not exist; carries the escape
/// report when the branch is missing because of an escape regime.
class ClassificationUnavailable : public std::runtime_error {
 public:
  ClassificationUnavailable(const std::string& what, std::optional<EscapeReport> report)
      : std::runtime_error(what), report_(std::move(report)) {}
  [[nodiscard]] const std::optional<EscapeReport>& report() const { return report_; }

 private:
  std::optional<EscapeReport> report_;
};

/// Jacobian of the system along the particular solution at time t.
[[nodiscard]] EigenPair linearize(const PerturbedSystem& sys, const AsymptoticSolution& sol,
                                  double t);

[[nodiscard]] CriterionSet criteria(const PerturbedSystem& sys, const AssumptionProfile& profile);

/// Pure verdict logic over precomputed criteria.
[[nodiscard]] StabilityVerdict classify(const CriterionSet& crit, const AssumptionProfile& profile,
                                        int q, Branch branch);

/// Checks that the branch exists, then applies the verdict logic.
[[nodiscard]] StabilityVerdict classify(const PerturbedSystem& sys, Branch branch);

enum class LyapunovKind { U1, U2, U3, W2Rescaled, W3Rescaled };

[[nodiscard]] std::string to_string(LyapunovKind k);
/// The Lyapunov function whose sign of derivative decides the branch.
[[nodiscard]] LyapunovKind natural_lyapunov_kind(Branch b);

/// Lyapunov-function candidates in the deviation (xi, eta) from a branch.
///   U1: the Hamiltonian-based function of the lambda > 0 centre case (the
///       variant with the d_n correction when the perturbation is
///       Hamiltonian).
///   U2, U3: the rescaled-variable functions of the lambda = 0 cases.
///   W2Rescaled, W3Rescaled: the quadratic forms (omega^2 X^2 + Y^2)/2 in the
///       rescaled variables.
class LyapunovFunction {
 public:
  /// Throws std::invalid_argument when `kind` does not fit the branch.
  LyapunovFunction(const PerturbedSystem& sys, const AsymptoticSolution& sol, LyapunovKind kind);

  [[nodiscard]] double operator()(const State& z, double t) const;
  /// Centred on `ref` instead of the series value, e.g. a numerically
  /// integrated particular solution.
  [[nodiscard]] double operator()(const State& z, const State& ref, double t) const;
  /// The deviation-energy part of the function, H(xi, eta, t).
  [[nodiscard]] double deviation_hamiltonian(double xi, double eta, double t) const;
  [[nodiscard]] double deviation_hamiltonian(double xi, double eta, const State& ref,
                                             double t) const;
  [[nodiscard]] LyapunovKind kind() const { return kind_; }

 private:
  const PerturbedSystem* sys_;
  const AsymptoticSolution* sol_;
  LyapunovKind kind_;
  AssumptionProfile profile_;
  CriterionSet crit_;
  Poly1 vprime_;
};

[[nodiscard]] double lyapunov_value(const PerturbedSystem& sys, const AsymptoticSolution& sol,
                                    LyapunovKind kind, const State& z, double t);

enum class DeviationNorm {
  Auto,       ///< Weighted for sigma branches, Euclidean otherwise
  Euclidean,  ///< |(xi, eta)|
  Weighted    ///< amplitude of the case quadratic form (rescaled for lambda = 0)
};

/// Distance of a state from the branch at time t.
class DeviationMeter {
 public:
  DeviationMeter(const PerturbedSystem& sys, const AsymptoticSolution& sol, DeviationNorm norm);
  [[nodiscard]] double operator()(const State& z, double t) const;
  /// Distance of `z` from an explicitly supplied branch point `ref`.
  [[nodiscard]] double operator()(const State& z, const State& ref, double t) const;

 private:
  const AsymptoticSolution* sol_;
  DeviationNorm norm_;
  double omega_sq_ = 1.0;
  double x_exp_ = 0.0;
  double y_exp_ = 0.0;
};

}  // namespace bifurlab
