#pragma once

// JSON/CSV serialization of analysis results and the analyze pipeline
// shared by the command-line tool and the tests.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bifurlab/asymptotics.hpp"
#include "bifurlab/classifier.hpp"
#include "bifurlab/integrator.hpp"
#include "bifurlab/system_io.hpp"
#include "bifurlab/validation.hpp"

namespace bifurlab {

/// Shortest round-trip decimal form, independent of the C locale.
[[nodiscard]] std::string format_real(double v);

/// Writes `content` to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

[[nodiscard]] nlohmann::json to_json(const AssumptionProfile& p);
[[nodiscard]] nlohmann::json to_json(const CriterionSet& c);
[[nodiscard]] nlohmann::json to_json(const StabilityVerdict& v);
[[nodiscard]] nlohmann::json to_json(const EscapeReport& r);
[[nodiscard]] nlohmann::json to_json(const SlopeFit& f);
[[nodiscard]] nlohmann::json to_json(const ProbeReport& r);
[[nodiscard]] nlohmann::json to_json(const LeadingData& d);

/// Columns: index,exponent,x,y where the term is coeff * t^(-exponent).
[[nodiscard]] std::string coefficients_csv(const AsymptoticSolution& sol);
/// Columns: t,x,y.
[[nodiscard]] std::string trajectory_csv(const Trajectory& tr);

/// Settings of the validation suite run by `analyze --validate` and
/// `validate`.
struct ValidationSettings {
  IntegratorConfig cfg = [] {
    IntegratorConfig c;
    c.t0 = 10.0;
    c.t_end = 1e5;
    return c;
  }();
  std::vector<double> offsets{0.1, 0.025, 0.00625, 0.0015625};
  std::vector<double> horizons{1e3, 1e4, 1e5};
  double radius = 0.2;
  ProbeOptions probe;
  int lyapunov_samples = 400;
};

struct AnalyzeOptions {
  int order = -1;  ///< construction order, -1 for the default
  bool validate = false;
  ValidationSettings validation;
  /// When set, per-branch coefficient CSVs are written here and listed in
  /// the report.
  std::optional<std::filesystem::path> out_dir;
  std::string file_stem = "report";
};

/// Profile, every applicable construction, verdicts and (optionally) the
/// validation summaries, as the JSON run report.
[[nodiscard]] nlohmann::json analyze(const SystemDescription& desc, const AnalyzeOptions& opt);

/// Residual-order fit, escape-time probe and Lyapunov check for one branch.
[[nodiscard]] nlohmann::json validate_branch(const PerturbedSystem& sys,
                                             const AsymptoticSolution& sol,
                                             const ValidationSettings& s);

}  // namespace bifurlab
