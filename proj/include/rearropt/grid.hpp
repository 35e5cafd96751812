#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "rearropt/field.hpp"

namespace rearropt {

/// Uniform partition of a box domain into congruent cells.
///
/// Cell order is row-major (axis 0 fastest) and deterministic; all cells are
/// congruent so the cell measure is a single number. Cell edges are computed
/// as lo + k*h, so edges shared by neighboring cells agree bit-exactly.
struct Grid {
  int dim = 1;
  std::array<double, 2> lo{{0.0, 0.0}};
  std::array<double, 2> hi{{1.0, 1.0}};
  std::array<int, 2> cells{{1, 1}};  // cells per axis; axis 1 holds 1 in 1D
  int n = 0;
  std::array<double, 2> h{{0.0, 0.0}};
  double cell_measure = 0.0;
  double domain_measure = 0.0;
  std::vector<Point> centers;
  std::vector<bool> boundary_adjacent;

  /// Edge coordinate k of the cell lattice along an axis (k in [0, cells]).
  double edge(int axis, int k) const { return lo[axis] + k * h[axis]; }

  int index(int ix, int iy) const { return iy * cells[0] + ix; }
  std::array<int, 2> coords(int i) const { return {i % cells[0], i / cells[0]}; }

  /// Per-axis interval [lo, hi] of a cell.
  std::array<double, 2> cell_interval(int i, int axis) const {
    const auto c = coords(i);
    return {edge(axis, c[axis]), edge(axis, c[axis] + 1)};
  }

  double diameter() const {
    double d2 = 0.0;
    for (int a = 0; a < dim; ++a) d2 += (hi[a] - lo[a]) * (hi[a] - lo[a]);
    return std::sqrt(d2);
  }
};

inline Grid build_grid(int dim, const std::array<std::array<double, 2>, 2>& bounds,
                       const std::array<int, 2>& cells_per_axis) {
  if (dim != 1 && dim != 2)
    throw std::invalid_argument("build_grid: dim must be 1 or 2, got " + std::to_string(dim));
  Grid g;
  g.dim = dim;
  for (int a = 0; a < dim; ++a) {
    if (!(bounds[a][0] < bounds[a][1]))
      throw std::invalid_argument("build_grid: empty or inverted bounds on axis " +
                                  std::to_string(a));
    if (cells_per_axis[a] < 2)
      throw std::invalid_argument("build_grid: need at least 2 cells per axis");
    g.lo[a] = bounds[a][0];
    g.hi[a] = bounds[a][1];
    g.cells[a] = cells_per_axis[a];
  }
  if (dim == 1) {
    g.lo[1] = 0.0;
    g.hi[1] = 1.0;
    g.cells[1] = 1;
  }
  g.n = g.cells[0] * g.cells[1];
  g.domain_measure = 1.0;
  g.cell_measure = 1.0;
  for (int a = 0; a < dim; ++a) {
    g.h[a] = (g.hi[a] - g.lo[a]) / g.cells[a];
    g.domain_measure *= g.hi[a] - g.lo[a];
    g.cell_measure *= g.h[a];
  }
  g.centers.resize(g.n);
  g.boundary_adjacent.resize(g.n);
  for (int i = 0; i < g.n; ++i) {
    const auto c = g.coords(i);
    Point p{0.0, 0.0};
    bool adj = false;
    for (int a = 0; a < dim; ++a) {
      p[a] = g.lo[a] + (c[a] + 0.5) * g.h[a];
      adj = adj || c[a] == 0 || c[a] == g.cells[a] - 1;
    }
    g.centers[i] = p;
    g.boundary_adjacent[i] = adj;
  }
  return g;
}

}  // namespace rearropt
