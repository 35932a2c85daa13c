#pragma once

// Level lines of a scalar field by marching squares.

#include <array>
#include <functional>
#include <vector>

namespace bifurlab {

struct Window {
  double x_min, x_max, y_min, y_max;
};

/// Bounding box of `points` enlarged by `margin` times its extent on each
/// side (a degenerate extent is widened to 1 first).
[[nodiscard]] Window padded_window(const std::vector<std::array<double, 2>>& points,
                                   double margin = 0.3);

struct Polyline {
  double level;
  std::vector<std::array<double, 2>> points;
  bool closed = false;
};

/// Samples f on an nx-by-ny vertex grid over `win` and returns the joined
/// level-line polylines for every requested level. Saddle cells are
/// disambiguated by the cell-centre average.
[[nodiscard]] std::vector<Polyline> contour_lines(const std::function<double(double, double)>& f,
                                                  const Window& win, int nx, int ny,
                                                  const std::vector<double>& levels);

}  // namespace bifurlab
