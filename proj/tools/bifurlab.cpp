// bifurlab: analyze | simulate | figure | validate.
//
// Exit codes: 0 success (possibly partial analysis), 2 input error,
// 3 numerical failure.

#include <cmath>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bifurlab/figures.hpp"
#include "bifurlab/report.hpp"
#include "bifurlab/system_io.hpp"

using namespace bifurlab;
using nlohmann::json;

namespace {

constexpr int kInputError = 2;
constexpr int kNumericalError = 3;

struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SystemArgs {
  std::string input;
  std::string preset;
  std::vector<std::string> params;

  void attach(CLI::App* app) {
    app->add_option("input", input, "System description (JSON)");
    app->add_option("--preset", preset, "example1 or example2 instead of an input file");
    app->add_option("--param", params, "Preset override K=V (repeatable)");
  }

  SystemDescription load(bool allow_unperturbed = false) const {
    if (!input.empty() && !preset.empty()) {
      throw SchemaError("", "give either an input file or --preset, not both");
    }
    if (!preset.empty()) {
      json p = json::object();
      for (const std::string& kv : params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw SchemaError("/params", "expected K=V, got '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        const std::string val = kv.substr(eq + 1);
        std::size_t used = 0;
        double d = 0;
        try {
          d = std::stod(val, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != val.size() || val.empty()) {
          throw SchemaError("/params/" + key, "not a number: '" + val + "'");
        }
        p[key] = d;
      }
      return make_preset(preset, p);
    }
    if (!params.empty()) throw SchemaError("/params", "--param needs --preset");
    if (input.empty()) throw SchemaError("", "no input file and no --preset");
    return load_system(input, allow_unperturbed);
  }
};

void emit(const json& j, const std::string& out_dir, const std::string& file) {
  const std::string text = j.dump(2) + "\n";
  if (!out_dir.empty()) write_atomic(std::filesystem::path(out_dir) / file, text);
  std::cout << text;
}

int run_analyze(const SystemArgs& sa, bool validate, const std::string& out_dir, int order) {
  const SystemDescription desc = sa.load();
  AnalyzeOptions opt;
  opt.order = order;
  opt.validate = validate;
  if (!out_dir.empty()) opt.out_dir = out_dir;
  json report = analyze(desc, opt);
  if (!out_dir.empty()) report["artifacts"].push_back((std::filesystem::path(out_dir) / "report.json").string());
  emit(report, out_dir, "report.json");
  return 0;
}

State parse_ic(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw SchemaError("--ic", "expected x,y");
  try {
    std::size_t ux = 0, uy = 0;
    const std::string xs = s.substr(0, comma), ys = s.substr(comma + 1);
    const double x = std::stod(xs, &ux);
    const double y = std::stod(ys, &uy);
    if (ux != xs.size() || uy != ys.size() || !std::isfinite(x) || !std::isfinite(y)) {
      throw std::invalid_argument("trailing characters");
    }
    return {x, y};
  } catch (const std::exception&) {
    throw SchemaError("--ic", "expected two finite numbers x,y, got '" + s + "'");
  }
}

int run_simulate(const SystemArgs& sa, const std::string& ic_text, double t0, double t_end,
                 double tol, int samples, const std::string& out) {
  const SystemDescription desc = sa.load(true);
  IntegratorConfig cfg;
  cfg.t0 = t0;
  cfg.t_end = t_end;
  cfg.rel_tol = tol;
  cfg.abs_tol = tol * 1e-3;
  if (samples < 2) throw SchemaError("--samples", "need at least 2");
  if (!(t0 > 0) || !(t_end > t0)) throw SchemaError("--t-end", "need 0 < t0 < t-end");
  cfg.sample_times = log_spaced(t0, t_end, samples);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError("", e.what());
  }
  const Trajectory tr = integrate(desc.system, parse_ic(ic_text), cfg);
  if (tr.terminated_by == Termination::StepFailure) {
    throw NumericalFailure("integration failed: " + tr.message +
                           " (last good time " + format_real(tr.last_time) + ")");
  }
  const std::string csv = trajectory_csv(tr);
  if (out.empty()) {
    std::cout << csv;
  } else {
    write_atomic(out, csv);
  }
  return 0;
}

int run_figure(const std::string& name, const std::string& out_dir) {
  Figure fig;
  try {
    fig = make_figure(name);
  } catch (const UnknownFigure& e) {
    throw SchemaError("name", e.what());
  }
  json files = json::array();
  for (const auto& p : write_figure(fig, out_dir)) files.push_back(p.string());
  std::cout << json{{"figure", name}, {"files", files}}.dump(2) << "\n";
  return 0;
}

int run_validate(const SystemArgs& sa, const std::string& out_dir) {
  const SystemDescription desc = sa.load();
  AnalyzeOptions opt;
  opt.validate = true;
  if (!out_dir.empty()) opt.out_dir = out_dir;
  const json report = analyze(desc, opt);
  json summary = json::array();
  for (const json& b : report["branches"]) {
    if (!b.contains("validation")) continue;
    const json& v = b["validation"];
    json row = {{"branch", b["branch"]},
                {"verdict", b["verdict"]["verdict"]},
                {"residual_order_passes", v["residual_order"]["passes"]},
                {"empirical_verdict", v["probe"]["empirical_verdict"]}};
    if (v["probe"].contains("agrees")) row["agrees"] = v["probe"]["agrees"];
    if (v["lyapunov"].contains("passes")) row["lyapunov_passes"] = v["lyapunov"]["passes"];
    summary.push_back(row);
  }
  emit({{"summary", summary}, {"report", report}}, out_dir, "validation.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particular solutions and stability of asymptotically autonomous systems"};
  app.require_subcommand(1);

  SystemArgs an_sys;
  bool an_validate = false;
  std::string an_out;
  int an_order = -1;
  auto* an = app.add_subcommand("analyze", "Constructions, verdicts and optional validation");
  an_sys.attach(an);
  an->add_flag("--validate", an_validate, "Run the numerical validation suite");
  an->add_option("--out-dir", an_out, "Directory for report.json and coefficient CSVs");
  an->add_option("--order", an_order, "Series order (grid steps), default per branch");

  SystemArgs sim_sys;
  std::string sim_ic, sim_out;
  double sim_t0 = 1.0, sim_t_end = 1e3, sim_tol = 1e-9;
  int sim_samples = 400;
  auto* sim = app.add_subcommand("simulate", "Integrate one trajectory to CSV");
  sim_sys.attach(sim);
  sim->add_option("--ic", sim_ic, "Initial point x,y")->required();
  sim->add_option("--t0", sim_t0, "Initial time");
  sim->add_option("--t-end", sim_t_end, "Final time");
  sim->add_option("--tol", sim_tol, "Relative tolerance (absolute is 1e-3 of it)");
  sim->add_option("--samples", sim_samples, "Number of log-spaced sample times");
  sim->add_option("--out", sim_out, "Output CSV (stdout when absent)");

  std::string fig_name, fig_out = ".";
  auto* fig = app.add_subcommand("figure", "Trajectory and level-line CSVs for a figure");
  fig->add_option("name", fig_name, "fig1 | fig2 | fig3b | fig5 | fig6")->required();
  fig->add_option("--out-dir", fig_out, "Output directory");

  SystemArgs val_sys;
  std::string val_out;
  auto* val = app.add_subcommand("validate", "Validation suite with a pass/fail summary");
  val_sys.attach(val);
  val->add_option("--out-dir", val_out, "Directory for validation.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kInputError;
  }

  try {
    if (an->parsed()) return run_analyze(an_sys, an_validate, an_out, an_order);
    if (sim->parsed()) {
      return run_simulate(sim_sys, sim_ic, sim_t0, sim_t_end, sim_tol, sim_samples, sim_out);
    }
    if (fig->parsed()) return run_figure(fig_name, fig_out);
    if (val->parsed()) return run_validate(val_sys, val_out);
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const NumericalFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericalError;
  }
  return 0;
}
