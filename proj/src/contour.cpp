#include "bifurlab/contour.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace bifurlab {

Window padded_window(const std::vector<std::array<double, 2>>& points, double margin) {
  if (points.empty()) throw std::invalid_argument("padded_window: no points");
  Window w{points[0][0], points[0][0], points[0][1], points[0][1]};
  for (const auto& p : points) {
    w.x_min = std::min(w.x_min, p[0]);
    w.x_max = std::max(w.x_max, p[0]);
    w.y_min = std::min(w.y_min, p[1]);
    w.y_max = std::max(w.y_max, p[1]);
  }
  auto widen = [margin](double& lo, double& hi) {
    double ext = hi - lo;
    if (ext <= 0) {
      lo -= 0.5;
      hi += 0.5;
      ext = 1.0;
    }
    lo -= margin * ext;
    hi += margin * ext;
  };
  widen(w.x_min, w.x_max);
  widen(w.y_min, w.y_max);
  return w;
}

namespace {

struct Segment {
  long long e0, e1;
  std::array<double, 2> p0, p1;
};

}  // namespace

std::vector<Polyline> contour_lines(const std::function<double(double, double)>& f,
                                    const Window& win, int nx, int ny,
                                    const std::vector<double>& levels) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("contour_lines: grid needs >= 2x2 vertices");
  if (!(win.x_max > win.x_min) || !(win.y_max > win.y_min)) {
    throw std::invalid_argument("contour_lines: empty window");
  }
  const double dx = (win.x_max - win.x_min) / (nx - 1);
  const double dy = (win.y_max - win.y_min) / (ny - 1);
  auto X = [&](int i) { return win.x_min + i * dx; };
  auto Y = [&](int j) { return win.y_min + j * dy; };
  std::vector<double> v(static_cast<std::size_t>(nx) * ny);
  auto at = [&](int i, int j) -> double& { return v[static_cast<std::size_t>(j) * nx + i]; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) at(i, j) = f(X(i), Y(j));
  }

  // Edge ids: horizontal (i,j)-(i+1,j) even, vertical (i,j)-(i,j+1) odd.
  auto h_id = [&](int i, int j) { return 2LL * (static_cast<long long>(j) * nx + i); };
  auto v_id = [&](int i, int j) { return 2LL * (static_cast<long long>(j) * nx + i) + 1; };

  std::vector<Polyline> out;
  for (double L : levels) {
    auto cross = [&](double a, double b) { return (a - L) / (a - b); };
    auto h_pt = [&](int i, int j) -> std::array<double, 2> {
      return {X(i) + cross(at(i, j), at(i + 1, j)) * dx, Y(j)};
    };
    auto v_pt = [&](int i, int j) -> std::array<double, 2> {
      return {X(i), Y(j) + cross(at(i, j), at(i, j + 1)) * dy};
    };
    std::vector<Segment> segs;
    for (int j = 0; j + 1 < ny; ++j) {
      for (int i = 0; i + 1 < nx; ++i) {
        const bool a = at(i, j) >= L, b = at(i + 1, j) >= L;
        const bool c = at(i + 1, j + 1) >= L, d = at(i, j + 1) >= L;
        // Edges: bottom a-b, right b-c, top d-c, left a-d.
        struct E {
          long long id;
          std::array<double, 2> p;
        };
        std::vector<E> bottom, right, top, left;
        if (a != b) bottom.push_back({h_id(i, j), h_pt(i, j)});
        if (b != c) right.push_back({v_id(i + 1, j), v_pt(i + 1, j)});
        if (d != c) top.push_back({h_id(i, j + 1), h_pt(i, j + 1)});
        if (a != d) left.push_back({v_id(i, j), v_pt(i, j)});
        std::vector<E> es;
        for (auto* s : {&bottom, &right, &top, &left}) es.insert(es.end(), s->begin(), s->end());
        if (es.size() == 2) {
          segs.push_back({es[0].id, es[1].id, es[0].p, es[1].p});
        } else if (es.size() == 4) {
          const double centre =
              0.25 * (at(i, j) + at(i + 1, j) + at(i + 1, j + 1) + at(i, j + 1));
          if ((centre >= L) == a) {
            segs.push_back({bottom[0].id, right[0].id, bottom[0].p, right[0].p});
            segs.push_back({top[0].id, left[0].id, top[0].p, left[0].p});
          } else {
            segs.push_back({left[0].id, bottom[0].id, left[0].p, bottom[0].p});
            segs.push_back({right[0].id, top[0].id, right[0].p, top[0].p});
          }
        }
      }
    }

    std::unordered_map<long long, std::vector<int>> by_edge;
    for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
      by_edge[segs[static_cast<std::size_t>(s)].e0].push_back(s);
      by_edge[segs[static_cast<std::size_t>(s)].e1].push_back(s);
    }
    std::vector<char> used(segs.size(), 0);
    auto walk = [&](int start, long long from_edge) {
      Polyline pl{L, {}, false};
      int s = start;
      long long edge = from_edge;
      const Segment& s0 = segs[static_cast<std::size_t>(s)];
      pl.points.push_back(s0.e0 == edge ? s0.p0 : s0.p1);
      while (s >= 0 && !used[static_cast<std::size_t>(s)]) {
        used[static_cast<std::size_t>(s)] = 1;
        const Segment& sg = segs[static_cast<std::size_t>(s)];
        const bool fwd = sg.e0 == edge;
        edge = fwd ? sg.e1 : sg.e0;
        pl.points.push_back(fwd ? sg.p1 : sg.p0);
        int next = -1;
        for (int cand : by_edge[edge]) {
          if (!used[static_cast<std::size_t>(cand)]) next = cand;
        }
        s = next;
      }
      if (edge == from_edge && pl.points.size() > 2) pl.closed = true;
      return pl;
    };
    // Open lines start at boundary edges (touched by a single segment).
    for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
      if (used[static_cast<std::size_t>(s)]) continue;
      const Segment& sg = segs[static_cast<std::size_t>(s)];
      if (by_edge[sg.e0].size() == 1) {
        out.push_back(walk(s, sg.e0));
      } else if (by_edge[sg.e1].size() == 1) {
        out.push_back(walk(s, sg.e1));
      }
    }
    for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
      if (!used[static_cast<std::size_t>(s)]) out.push_back(walk(s, segs[static_cast<std::size_t>(s)].e0));
    }
  }
  return out;
}

}  // namespace bifurlab
