#pragma once

// Figure-ready data for the worked examples: ensemble trajectories from a
// ring of initial points plus level lines of the limiting Hamiltonian.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bifurlab/contour.hpp"
#include "bifurlab/integrator.hpp"
#include "bifurlab/system_io.hpp"

namespace bifurlab {

class UnknownFigure : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Panel {
  std::string label;  ///< "a", "b", ...
  SystemDescription system;
  double t0 = 1.0;
  double t_end = 100.0;
  double sample_dt = 0.05;
  std::vector<State> initial_points;
  Window window{};
  std::vector<Trajectory> trajectories;
  std::vector<Polyline> level_lines;
};

struct Figure {
  std::string name;
  std::vector<Panel> panels;
};

[[nodiscard]] const std::vector<std::string>& figure_names();

/// 12 points on the circle of radius `r` around `centre`.
[[nodiscard]] std::vector<State> initial_ring(State centre, double r = 0.3, int count = 12);

/// Sets up the panels of `name` without integrating. Throws UnknownFigure.
[[nodiscard]] Figure figure_spec(const std::string& name);

/// Integrates every panel and computes its level lines on a grid x grid
/// vertex lattice.
[[nodiscard]] Figure make_figure(const std::string& name, int grid = 400);

/// Writes <out>/<name>/panel_<label>/{trajectories.csv, level_lines.csv,
/// panel.json} and returns the written paths.
std::vector<std::filesystem::path> write_figure(const Figure& fig,
                                                const std::filesystem::path& out_dir);

}  // namespace bifurlab
