#include "bifurlab/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <system_error>

namespace bifurlab {

using nlohmann::json;

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::random_device rd;
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(rd() % 1000000);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

namespace {

json opt_num(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json num(double v) {
  // JSON has no infinities or NaN.
  return std::isfinite(v) ? json(v) : json(format_real(v));
}

}  // namespace

json to_json(const AssumptionProfile& p) {
  return {{"n", p.n},
          {"as0_holds", p.as0_holds},
          {"m", p.m ? json(*p.m) : json(nullptr)},
          {"as1_holds", p.as1_holds},
          {"as2_holds", p.as2_holds},
          {"h", p.h ? json(*p.h) : json(nullptr)},
          {"hamiltonian_pert", p.hamiltonian_pert},
          {"delta_nq", p.delta_nq}};
}

json to_json(const CriterionSet& c) {
  return {{"gamma_nh", opt_num(c.gamma_nh)},   {"d_n", opt_num(c.d_n)},
          {"gamma_n0", opt_num(c.gamma_n0)},   {"alpha_nm", opt_num(c.alpha_nm)},
          {"beta_n", opt_num(c.beta_n)},       {"delta_n", opt_num(c.delta_n)},
          {"omega1_sq", opt_num(c.omega1_sq)}, {"omega2_sq", opt_num(c.omega2_sq)},
          {"omega3_sq", opt_num(c.omega3_sq)}};
}

json to_json(const StabilityVerdict& v) {
  return {{"branch", to_string(v.branch)},
          {"verdict", to_string(v.verdict)},
          {"theorem", v.theorem},
          {"criteria", to_json(v.criteria)},
          {"notes", v.notes}};
}

json to_json(const EscapeReport& r) {
  return {{"regime", to_string(r.regime)},       {"theta1", r.theta1},
          {"theta2", r.theta2},                  {"x_exponent", r.x_exponent},
          {"y_exponent", r.y_exponent},          {"tau_exponent", r.tau_exponent},
          {"x_shift", r.x_shift},                {"rescaled_limit", r.rescaled_limit}};
}

json to_json(const LeadingData& d) {
  return {{"x_index", d.x_index},
          {"x_value", static_cast<double>(d.x_value)},
          {"y_index", d.y_index},
          {"y_value", static_cast<double>(d.y_value)}};
}

json to_json(const SlopeFit& f) {
  return {{"exact", f.exact},
          {"slope", num(f.slope)},
          {"threshold", f.threshold},
          {"passes", f.passes}};
}

json to_json(const ProbeReport& r) {
  json cells = json::array();
  for (std::size_t i = 0; i < r.offsets.size(); ++i) {
    for (std::size_t j = 0; j < r.horizons.size(); ++j) {
      const CellOutcome& c = r.outcomes[i][j];
      json cell = {{"offset", r.offsets[i]}, {"horizon", r.horizons[j]}};
      if (!c.error.empty()) {
        cell["error"] = c.error;
      } else if (c.stayed) {
        cell["outcome"] = "stayed";
      } else {
        cell["outcome"] = "escaped";
        cell["escape_time"] = *c.escape_time;
      }
      cells.push_back(cell);
    }
  }
  json out = {{"branch", to_string(r.branch)},
              {"offsets", r.offsets},
              {"horizons", r.horizons},
              {"cells", cells},
              {"empirical_verdict", to_string(r.empirical_verdict)}};
  if (r.theory_verdict) {
    out["theory_verdict"] = to_string(r.theory_verdict->verdict);
    out["agrees"] = agrees(r.empirical_verdict, r.theory_verdict->verdict);
  }
  if (auto e = escape_exponent(r)) out["escape_exponent"] = *e;
  return out;
}

std::string coefficients_csv(const AsymptoticSolution& sol) {
  std::string out = "index,exponent,x,y\n";
  const int lo = std::min(sol.x.k_min(), sol.y.k_min());
  const int hi = std::max(sol.x.k_max(), sol.y.k_max());
  for (int k = lo; k <= hi; ++k) {
    out += std::to_string(k) + "," + format_real(static_cast<double>(k) / sol.grid_den) + "," +
           format_real(static_cast<double>(sol.x[k])) + "," +
           format_real(static_cast<double>(sol.y[k])) + "\n";
  }
  return out;
}

std::string trajectory_csv(const Trajectory& tr) {
  std::string out = "t,x,y\n";
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    out += format_real(tr.times[i]) + "," + format_real(tr.states[i][0]) + "," +
           format_real(tr.states[i][1]) + "\n";
  }
  return out;
}

json validate_branch(const PerturbedSystem& sys, const AsymptoticSolution& sol,
                     const ValidationSettings& s) {
  json out;
  const SlopeFit fit = check_order(sol, sys, log_spaced(1e3, 1e6, 16));
  out["residual_order"] = to_json(fit);

  IntegratorConfig cfg = s.cfg;
  cfg.t_end = s.horizons.back();
  const ProbeReport rep = probe(sys, sol, s.offsets, s.horizons, s.radius, cfg, s.probe);
  out["probe"] = to_json(rep);

  json lyap;
  try {
    const LyapunovKind kind = natural_lyapunov_kind(sol.branch);
    const Trajectory tr = probe_trajectory(sys, sol, s.offsets.front(), cfg, s.probe,
                                           s.lyapunov_samples);
    const MonotonicityResult m = lyapunov_monotonicity(sys, sol, tr, kind);
    lyap = {{"kind", to_string(kind)},
            {"expected_sign", m.expected_sign},
            {"fraction_violating", m.fraction_violating},
            {"pairs_used", m.pairs_used},
            {"passes", m.passes()}};
  } catch (const NotApplicable& e) {
    lyap = {{"not_applicable", e.what()}};
  } catch (const std::exception& e) {
    lyap = {{"error", e.what()}};
  }
  out["lyapunov"] = lyap;
  return out;
}

json analyze(const SystemDescription& desc, const AnalyzeOptions& opt) {
  const PerturbedSystem& sys = desc.system;
  json report;
  report["system"] = system_to_json(sys);
  if (desc.preset) report["preset"] = {{"name", *desc.preset}, {"params", desc.preset_params}};
  const AssumptionProfile profile = detect_profile(sys);
  report["profile"] = to_json(profile);
  report["criteria"] = to_json(criteria(sys, profile));

  json branches = json::array();
  json artifacts = json::array();
  const std::vector<Branch> todo = applicable_branches(sys);
  if (todo.empty()) {
    std::string why = "no construction applies";
    if (!profile.as0_holds) {
      why += ": n > q";
    } else if (sys.lambda() < 0) {
      why += ": lambda < 0";
    } else if (sys.lambda() == 0) {
      why += ": neither G_{n+l}(0,0) condition holds";
    }
    report["notes"] = why;
  }
  for (Branch b : todo) {
    json entry = {{"branch", to_string(b)}};
    try {
      Construction con = build_branch(sys, b, opt.order);
      if (auto* rep = std::get_if<EscapeReport>(&con)) {
        entry["exists"] = false;
        entry["escape"] = to_json(*rep);
      } else {
        const auto& sol = std::get<AsymptoticSolution>(con);
        entry["exists"] = true;
        entry["order"] = sol.order;
        entry["grid_den"] = sol.grid_den;
        entry["leading"] = to_json(sol.leading);
        entry["solved_order_defect"] = sol.solved_order_defect;
        entry["verdict"] = to_json(classify(sys, b));
        if (opt.out_dir) {
          const auto path = *opt.out_dir / (opt.file_stem + "_" + to_string(b) + ".csv");
          write_atomic(path, coefficients_csv(sol));
          entry["coefficients_csv"] = path.string();
          artifacts.push_back(path.string());
        }
        if (opt.validate) entry["validation"] = validate_branch(sys, sol, opt.validation);
      }
    } catch (const AssumptionError& e) {
      entry["exists"] = false;
      entry["error"] = e.what();
    } catch (const ClassificationUnavailable& e) {
      entry["error"] = e.what();
    }
    branches.push_back(entry);
  }
  report["branches"] = branches;
  report["artifacts"] = artifacts;
  return report;
}

}  // namespace bifurlab
