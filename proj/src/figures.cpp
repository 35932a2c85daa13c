#include "bifurlab/figures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bifurlab/report.hpp"

namespace bifurlab {

using nlohmann::json;

const std::vector<std::string>& figure_names() {
  static const std::vector<std::string> names{"fig1", "fig2", "fig3b", "fig5", "fig6"};
  return names;
}

std::vector<State> initial_ring(State centre, double r, int count) {
  std::vector<State> out;
  for (int i = 0; i < count; ++i) {
    const double a = 2 * std::numbers::pi * i / count;
    out.push_back({centre[0] + r * std::cos(a), centre[1] + r * std::sin(a)});
  }
  return out;
}

namespace {

Panel panel(const std::string& label, SystemDescription sys, double t0) {
  const double lam = sys.system.lambda();
  return Panel{label, std::move(sys), t0, 100.0, 0.05,
               initial_ring({lam > 0 ? std::sqrt(lam) : 0.0, 0.0}), Window{}, {}, {}};
}

SystemDescription ex1(double lambda, double B, double C, double kappa) {
  return make_preset("example1", {{"lambda", lambda}, {"B", B}, {"C", C}, {"kappa", kappa}});
}

SystemDescription ex2(double lambda, double B) {
  return make_preset("example2", {{"lambda", lambda}, {"A", 1.0}, {"B", B}, {"C", 1.0}});
}

const char* kLabels[] = {"a", "b", "c"};

}  // namespace

Figure figure_spec(const std::string& name) {
  Figure fig{name, {}};
  if (name == "fig1") {
    const double Bs[] = {0.1, 0.0, -0.5};
    for (int i = 0; i < 3; ++i) fig.panels.push_back(panel(kLabels[i], ex1(1.0, Bs[i], 1.5, 0.5), 1.0));
  } else if (name == "fig2") {
    const double Bs[] = {-1.5, -0.6, 0.5};
    for (int i = 0; i < 3; ++i) fig.panels.push_back(panel(kLabels[i], ex1(0.0, Bs[i], 1.5, 1.0), 1.0));
  } else if (name == "fig3b") {
    fig.panels.push_back(panel("b", ex1(0.0, -1.5, -0.1, 1.0), 2.0));
  } else if (name == "fig5") {
    const double Bs[] = {-3.0, -2.25, 1.0};
    for (int i = 0; i < 3; ++i) fig.panels.push_back(panel(kLabels[i], ex2(0.0, Bs[i]), 2.0));
  } else if (name == "fig6") {
    const double Bs[] = {-1.0, 0.5};
    for (int i = 0; i < 2; ++i) fig.panels.push_back(panel(kLabels[i], ex2(0.25, Bs[i]), 1.0));
  } else {
    std::string known;
    for (const auto& n : figure_names()) known += (known.empty() ? "" : ", ") + n;
    throw UnknownFigure("unknown figure '" + name + "' (known: " + known + ")");
  }
  for (Panel& p : fig.panels) {
    std::vector<std::array<double, 2>> pts(p.initial_points.begin(), p.initial_points.end());
    const double lam = p.system.system.lambda();
    if (lam > 0) {
      pts.push_back({std::sqrt(lam), 0.0});
      pts.push_back({-std::sqrt(lam), 0.0});
    } else if (lam == 0) {
      pts.push_back({0.0, 0.0});
    }
    p.window = padded_window(pts, 0.3);
  }
  return fig;
}

Figure make_figure(const std::string& name, int grid) {
  Figure fig = figure_spec(name);
  for (Panel& p : fig.panels) {
    const PerturbedSystem& sys = p.system.system;
    IntegratorConfig cfg;
    cfg.t0 = p.t0;
    cfg.t_end = p.t_end;
    cfg.rel_tol = 1e-9;
    cfg.abs_tol = 1e-12;
    // Escaping members are cut off well outside the window.
    const double span = std::max(p.window.x_max - p.window.x_min, p.window.y_max - p.window.y_min);
    cfg.escape_radius = 5.0 * span + 1.0;
    std::vector<double> ts;
    const auto n = static_cast<long>(std::llround((p.t_end - p.t0) / p.sample_dt));
    for (long i = 0; i <= n; ++i) ts.push_back(p.t0 + (p.t_end - p.t0) * static_cast<double>(i) / n);
    cfg.sample_times = ts;
    p.trajectories = ensemble(sys, p.initial_points, cfg);

    // Level lines through each initial point and through the saddle.
    std::vector<double> levels;
    for (const State& s : p.initial_points) levels.push_back(sys.hamiltonian(s[0], s[1]));
    const double lam = sys.lambda();
    if (lam > 0) levels.push_back(sys.hamiltonian(-std::sqrt(lam), 0.0));
    if (lam == 0) levels.push_back(0.0);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end(),
                             [](double a, double b) { return std::abs(a - b) <= 1e-12 * (1 + std::abs(a)); }),
                 levels.end());
    p.level_lines = contour_lines([&](double x, double y) { return sys.hamiltonian(x, y); },
                                  p.window, grid, grid, levels);
  }
  return fig;
}

std::vector<std::filesystem::path> write_figure(const Figure& fig,
                                                const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> written;
  for (const Panel& p : fig.panels) {
    const auto dir = out_dir / fig.name / ("panel_" + p.label);

    std::string traj = "member,t,x,y\n";
    for (std::size_t m = 0; m < p.trajectories.size(); ++m) {
      const Trajectory& tr = p.trajectories[m];
      for (std::size_t i = 0; i < tr.times.size(); ++i) {
        traj += std::to_string(m) + "," + format_real(tr.times[i]) + "," +
                format_real(tr.states[i][0]) + "," + format_real(tr.states[i][1]) + "\n";
      }
    }
    write_atomic(dir / "trajectories.csv", traj);
    written.push_back(dir / "trajectories.csv");

    std::string lines = "level,line,x,y\n";
    for (std::size_t l = 0; l < p.level_lines.size(); ++l) {
      const Polyline& pl = p.level_lines[l];
      for (const auto& pt : pl.points) {
        lines += format_real(pl.level) + "," + std::to_string(l) + "," + format_real(pt[0]) + "," +
                 format_real(pt[1]) + "\n";
      }
    }
    write_atomic(dir / "level_lines.csv", lines);
    written.push_back(dir / "level_lines.csv");

    json members = json::array();
    for (std::size_t m = 0; m < p.trajectories.size(); ++m) {
      const Trajectory& tr = p.trajectories[m];
      members.push_back({{"member", m},
                         {"initial_point", {p.initial_points[m][0], p.initial_points[m][1]}},
                         {"terminated_by", to_string(tr.terminated_by)},
                         {"last_time", tr.last_time}});
    }
    json meta = {{"figure", fig.name},
                 {"panel", p.label},
                 {"system", system_to_json(p.system.system)},
                 {"t0", p.t0},
                 {"t_end", p.t_end},
                 {"sample_dt", p.sample_dt},
                 {"initial_points", "ring of 12 points, radius 0.3, around the centre fixed point"},
                 {"window",
                  {{"x_min", p.window.x_min},
                   {"x_max", p.window.x_max},
                   {"y_min", p.window.y_min},
                   {"y_max", p.window.y_max}}},
                 {"members", members}};
    if (p.system.preset) {
      meta["preset"] = {{"name", *p.system.preset}, {"params", p.system.preset_params}};
    }
    write_atomic(dir / "panel.json", meta.dump(2) + "\n");
    written.push_back(dir / "panel.json");
  }
  return written;
}

}  // namespace bifurlab
