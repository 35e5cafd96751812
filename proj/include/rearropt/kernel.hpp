#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "rearropt/field.hpp"
#include "rearropt/grid.hpp"
#include "rearropt/quadrature.hpp"

namespace rearropt {

enum class KernelFamily { pure_fractional, modulated };

/// Symmetric modulation factor m(x, y); must take values in [C1, C2].
using ModulationFn = std::function<double(const Point&, const Point&)>;

struct KernelSpec {
  double p = 2.0;  // > 1
  double s = 0.5;  // in (0, 1)
  KernelFamily family = KernelFamily::pure_fractional;
  double C = 1.0;             // pure_fractional: K(x,y) = C |x-y|^{-(N+ps)}
  double C1 = 1.0, C2 = 1.0;  // modulated: C1 <= m <= C2
  ModulationFn modulation;
  std::string modulation_name;  // identifies the preset in cache keys

  double ps() const { return p * s; }

  void validate() const {
    if (!(p > 1.0)) throw std::invalid_argument("kernel: p must be > 1");
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("kernel: s must be in (0,1)");
    if (family == KernelFamily::pure_fractional) {
      if (!(C > 0.0)) throw std::invalid_argument("kernel: C must be positive");
    } else {
      if (!(C1 > 0.0 && C1 <= C2))
        throw std::invalid_argument("kernel: need 0 < C1 <= C2");
      if (!modulation) throw std::invalid_argument("kernel: modulated family needs a modulation");
    }
  }
};

inline ModulationFn constant_modulation(double c) {
  return [c](const Point&, const Point&) { return c; };
}

/// Smooth checkerboard: m depends on the pair midpoint, hence symmetric.
inline ModulationFn checkerboard_modulation(double c1, double c2, double waves = 2.0) {
  return [c1, c2, waves](const Point& x, const Point& y) {
    const double pi = 3.14159265358979323846;
    double f = 1.0;
    for (int a = 0; a < 2; ++a) {
      const double m = 0.5 * (x[a] + y[a]);
      f *= 0.5 * (1.0 + std::sin(2.0 * pi * waves * m));
    }
    return c1 + (c2 - c1) * f;
  };
}

namespace detail {

/// Modulation evaluated on the canonically ordered pair; enforces (K1) exactly.
inline double modulation_at(const KernelSpec& spec, const Point& x, const Point& y) {
  const bool swap = (y[0] < x[0]) || (y[0] == x[0] && y[1] < x[1]);
  return swap ? spec.modulation(y, x) : spec.modulation(x, y);
}

}  // namespace detail

/// Pointwise kernel value K(x, y); rejects the diagonal x = y.
inline double eval_kernel(const KernelSpec& spec, int dim, const Point& x, const Point& y) {
  double r2 = 0.0;
  for (int a = 0; a < dim; ++a) r2 += (x[a] - y[a]) * (x[a] - y[a]);
  if (r2 == 0.0) throw std::invalid_argument("eval_kernel: x == y hits the singularity");
  const double r = std::sqrt(r2);
  const double pw = std::pow(r, -(dim + spec.ps()));
  if (spec.family == KernelFamily::pure_fractional) return spec.C * pw;
  return detail::modulation_at(spec, x, y) * pw;
}

struct AssemblyOptions {
  int angular_order = 20;     // Gauss order per smooth angular arc (2D)
  int radial_order = 8;       // Gauss order for exterior radial substitution
  int modulation_subdiv = 4;  // subcells per axis when resolving a modulation
  int graded_depth = 16;      // dyadic grading toward the boundary (modulated kappa)
  bool verify = false;        // recompute W at doubled angular order (2D)
  double verify_tol = 1e-6;
};

/// Cell-pair weights W_ij and exterior weights kappa_i of the discrete
/// seminorm. W is symmetric with zero diagonal; kappa encodes the nonlocal
/// Dirichlet condition u = 0 outside the domain.
struct KernelAssembly {
  Grid grid;
  double p = 2.0;
  double s = 0.5;
  Eigen::MatrixXd W;
  Eigen::VectorXd kappa;
};

namespace detail {

// ---------------------------------------------------------------- 1D closed forms

/// Double antiderivative G(t) = C t^{2-beta} / ((beta-1)(2-beta)), beta = 1+ps.
inline double corner_primitive(double C, double beta, double t) {
  if (t <= 0.0) return 0.0;
  return C * std::pow(t, 2.0 - beta) / ((beta - 1.0) * (2.0 - beta));
}

/// Exact pair integral of C |x-y|^{-beta} over [a1,b1] x [a2,b2], b1 <= a2.
inline double pure_pair_1d(double C, double beta, double a1, double b1, double a2, double b2) {
  return corner_primitive(C, beta, a2 - a1) + corner_primitive(C, beta, b2 - b1) -
         corner_primitive(C, beta, b2 - a1) - corner_primitive(C, beta, a2 - b1);
}

/// Exact exterior integral of C |x-y|^{-beta} over [ci,di] x (R \ [a,b]).
inline double pure_kappa_1d(double C, double beta, double a, double b, double ci, double di) {
  return corner_primitive(C, beta, di - a) - corner_primitive(C, beta, ci - a) +
         corner_primitive(C, beta, b - ci) - corner_primitive(C, beta, b - di);
}

// ---------------------------------------------------------------- 2D pure kernel

struct Rect {
  double x0, x1, y0, y1;
  Point center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
};

/// Pair integral of C |x-y|^{-(2+ps)} over A x B via the correlation reduction:
/// the 4D integral collapses to a 2D integral of the kernel against the product
/// of the per-axis overlap profiles, evaluated in polar coordinates with
/// analytic radial pieces. Valid for touching and separated rectangles alike.
inline double pure_pair_2d(double C, double ps, const Rect& A, const Rect& B, int order) {
  const double alpha = 2.0 + ps;
  const Overlap1D fx{A.x0, A.x1, B.x0, B.x1};
  const Overlap1D fy{A.y0, A.y1, B.y0, B.y1};
  const auto bx = fx.breakpoints();
  const auto by = fy.breakpoints();
  const Box2 D{bx[0], bx[3], by[0], by[3]};
  const double v = polar_integral(
      alpha, D, bx, by, [&](double z1, double z2) { return fx(z1) * fy(z2); }, order);
  return C * v;
}

/// Exterior weight integral of C |x-y|^{-(2+ps)} over Cell x (R^2 \ Omega).
inline double pure_kappa_2d(double C, double ps, const Rect& cell, const Rect& dom, int order) {
  const double alpha = 2.0 + ps;
  const Overlap1D tx{cell.x0, cell.x1, dom.x0, dom.x1};
  const Overlap1D ty{cell.y0, cell.y1, dom.y0, dom.y1};
  const auto bx = tx.breakpoints();
  const auto by = ty.breakpoints();
  const Box2 S{bx[0], bx[3], by[0], by[3]};
  const double mu = tx(0.0) * ty(0.0);  // full cell measure, same rounding as overlaps
  const double near = polar_integral(
      alpha, S, bx, by, [&](double z1, double z2) { return mu - tx(z1) * ty(z2); }, order);
  const double tail = mu * box_complement_integral(ps, S, order);
  return C * (near + tail);
}

// ---------------------------------------------------------------- modulated kernels

inline std::vector<double> uniform_edges(double a, double b, int k) {
  std::vector<double> e(k + 1);
  for (int i = 0; i <= k; ++i) e[i] = a + (b - a) * i / k;
  return e;
}

/// Modulated pair weight: subdivide both cells, freeze the modulation at
/// subcell center pairs, and integrate the radial factor exactly per subpair.
/// The singular contact contribution is exact up to the frozen modulation.
inline double modulated_pair_1d(const KernelSpec& spec, double a1, double b1, double a2,
                                double b2, int subdiv) {
  const double beta = 1.0 + spec.ps();
  const int k = subdiv;  // subpair primitives are closed-form, so always refine
  const auto ea = uniform_edges(a1, b1, k);
  const auto eb = uniform_edges(a2, b2, k);
  double acc = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const Point xc{0.5 * (ea[i] + ea[i + 1]), 0.0};
      const Point yc{0.5 * (eb[j] + eb[j + 1]), 0.0};
      const double m = modulation_at(spec, xc, yc);
      acc += m * pure_pair_1d(1.0, beta, ea[i], ea[i + 1], eb[j], eb[j + 1]);
    }
  return acc;
}

inline double modulated_pair_2d(const KernelSpec& spec, const Rect& A, const Rect& B,
                                int subdiv, int order) {
  const double hx = A.x1 - A.x0;
  const double gapx = std::max(std::max(B.x0 - A.x1, A.x0 - B.x1), 0.0);
  const double gapy = std::max(std::max(B.y0 - A.y1, A.y0 - B.y1), 0.0);
  const double gap = std::sqrt(gapx * gapx + gapy * gapy);
  const int k = gap <= 0.5 * hx ? subdiv : (gap <= 2.0 * hx ? 2 : 1);
  const auto eax = uniform_edges(A.x0, A.x1, k), eay = uniform_edges(A.y0, A.y1, k);
  const auto ebx = uniform_edges(B.x0, B.x1, k), eby = uniform_edges(B.y0, B.y1, k);
  double acc = 0.0;
  for (int ai = 0; ai < k; ++ai)
    for (int aj = 0; aj < k; ++aj)
      for (int bi = 0; bi < k; ++bi)
        for (int bj = 0; bj < k; ++bj) {
          const Rect a{eax[ai], eax[ai + 1], eay[aj], eay[aj + 1]};
          const Rect b{ebx[bi], ebx[bi + 1], eby[bj], eby[bj + 1]};
          const double m = modulation_at(spec, a.center(), b.center());
          acc += m * pure_pair_2d(1.0, spec.ps(), a, b, order);
        }
  return acc;
}

/// integral over t in [d, inf) of m(t) t^{-beta} dt  ==  d^{1-beta}/(beta-1) *
/// Gauss average of m under the substitution u = (d/t)^{beta-1}.
template <class M>
double exterior_ray_1d(double beta, double d, M&& m_at, int order) {
  const auto& gl = gauss_legendre(order);
  double avg = 0.0;
  for (int q = 0; q < order; ++q) {
    const double u = 0.5 * (1.0 + gl.x[q]);
    const double t = d * std::pow(u, -1.0 / (beta - 1.0));
    avg += 0.5 * gl.w[q] * m_at(t);
  }
  return std::pow(d, 1.0 - beta) / (beta - 1.0) * avg;
}

inline double modulated_kappa_1d(const KernelSpec& spec, const Grid& g, int cell,
                                 const AssemblyOptions& opts) {
  const double beta = 1.0 + spec.ps();
  const auto ci = g.cell_interval(cell, 0);
  const double a = g.edge(0, 0), b = g.edge(0, g.cells[0]);
  const bool at_left = g.coords(cell)[0] == 0;
  const bool at_right = g.coords(cell)[0] == g.cells[0] - 1;
  std::vector<double> edges;
  if (at_left)
    edges = graded_edges(ci[0], ci[1], false, opts.graded_depth);
  else if (at_right)
    edges = graded_edges(ci[0], ci[1], true, opts.graded_depth);
  else
    edges = uniform_edges(ci[0], ci[1], 2);
  const auto& gl = gauss_legendre(4);
  double acc = 0.0;
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    const double half = 0.5 * (edges[e + 1] - edges[e]);
    const double mid = 0.5 * (edges[e] + edges[e + 1]);
    for (int q = 0; q < 4; ++q) {
      const double x = mid + half * gl.x[q];
      const Point xp{x, 0.0};
      const double left = exterior_ray_1d(
          beta, x - a,
          [&](double t) { return modulation_at(spec, xp, Point{x - t, 0.0}); },
          opts.radial_order);
      const double right = exterior_ray_1d(
          beta, b - x,
          [&](double t) { return modulation_at(spec, xp, Point{x + t, 0.0}); },
          opts.radial_order);
      acc += half * gl.w[q] * (left + right);
    }
  }
  return acc;
}

inline double modulated_kappa_2d(const KernelSpec& spec, const Grid& g, int cell,
                                 const AssemblyOptions& opts) {
  const double ps = spec.ps();
  const auto cx = g.cell_interval(cell, 0);
  const auto cy = g.cell_interval(cell, 1);
  const Box2 dom{g.edge(0, 0), g.edge(0, g.cells[0]), g.edge(1, 0), g.edge(1, g.cells[1])};
  const auto cc = g.coords(cell);
  auto axis_edges = [&](const std::array<double, 2>& iv, int coord, int count) {
    if (coord == 0) return graded_edges(iv[0], iv[1], false, opts.graded_depth);
    if (coord == count - 1) return graded_edges(iv[0], iv[1], true, opts.graded_depth);
    return uniform_edges(iv[0], iv[1], 2);
  };
  const auto ex = axis_edges(cx, cc[0], g.cells[0]);
  const auto ey = axis_edges(cy, cc[1], g.cells[1]);
  const auto& gl = gauss_legendre(4);
  const auto& gla = gauss_legendre(12);
  const double pi = 3.14159265358979323846;
  double acc = 0.0;
  for (std::size_t ei = 0; ei + 1 < ex.size(); ++ei)
    for (std::size_t ej = 0; ej + 1 < ey.size(); ++ej) {
      const double hx = 0.5 * (ex[ei + 1] - ex[ei]), mx = 0.5 * (ex[ei] + ex[ei + 1]);
      const double hy = 0.5 * (ey[ej + 1] - ey[ej]), my = 0.5 * (ey[ej] + ey[ej + 1]);
      for (int qi = 0; qi < 4; ++qi)
        for (int qj = 0; qj < 4; ++qj) {
          const double x0 = mx + hx * gl.x[qi];
          const double y0 = my + hy * gl.x[qj];
          const Point xp{x0, y0};
          // angles of the domain-box corners as seen from x
          std::vector<double> ang;
          for (double bx : {dom.x0 - x0, dom.x1 - x0})
            for (double by : {dom.y0 - y0, dom.y1 - y0}) {
              double a = std::atan2(by, bx);
              if (a < 0.0) a += 2.0 * pi;
              ang.push_back(a);
            }
          std::sort(ang.begin(), ang.end());
          double inner = 0.0;
          for (std::size_t k = 0; k < ang.size(); ++k) {
            const double a0 = ang[k];
            const double a1 = (k + 1 < ang.size()) ? ang[k + 1] : ang[0] + 2.0 * pi;
            const double ha = 0.5 * (a1 - a0);
            if (ha < 1e-13) continue;
            const double ma = 0.5 * (a0 + a1);
            for (int qa = 0; qa < 12; ++qa) {
              const double th = ma + ha * gla.x[qa];
              const double c = std::cos(th), sn = std::sin(th);
              const Box2 rel{dom.x0 - x0, dom.x1 - x0, dom.y0 - y0, dom.y1 - y0};
              double t0, t1;
              if (!ray_box(rel, c, sn, t0, t1)) continue;
              // radial substitution u = (t1/r)^{ps} over r in [t1, inf)
              const auto& glr = gauss_legendre(opts.radial_order);
              double avg = 0.0;
              for (int qr = 0; qr < opts.radial_order; ++qr) {
                const double u = 0.5 * (1.0 + glr.x[qr]);
                const double r = t1 * std::pow(u, -1.0 / ps);
                avg += 0.5 * glr.w[qr] *
                       modulation_at(spec, xp, Point{x0 + r * c, y0 + r * sn});
              }
              inner += ha * gla.w[qa] * std::pow(t1, -ps) / ps * avg;
            }
          }
          acc += hx * hy * gl.w[qi] * gl.w[qj] * inner;
        }
    }
  return acc;
}

}  // namespace detail

/// Assembles the cell-pair weight matrix W and exterior weights kappa.
///
/// 1D pure-fractional kernels use the exact double-antiderivative closed form;
/// 2D pure-fractional kernels use the correlation reduction with analytic
/// radial integration (only the angular Gauss quadrature is approximate).
/// Modulated kernels freeze the modulation on subcell pairs around the same
/// exact radial integrals. Requires ps < 1: the piecewise-constant adjacent-cell
/// integral diverges otherwise.
inline KernelAssembly assemble(const Grid& grid, const KernelSpec& spec,
                               const AssemblyOptions& opts = {}) {
  spec.validate();
  if (!(spec.ps() < 1.0))
    throw std::invalid_argument("assemble: requires p*s < 1 (adjacent-cell integral diverges)");
  if (spec.family == KernelFamily::modulated) {
    // spot-check the (K2) bounds on a few cell-center pairs
    for (int i = 0; i < std::min(grid.n, 6); ++i)
      for (int j = i + 1; j < std::min(grid.n, 6); ++j) {
        const double m = detail::modulation_at(spec, grid.centers[i], grid.centers[j]);
        if (!(m >= spec.C1 - 1e-9 && m <= spec.C2 + 1e-9))
          throw std::invalid_argument("assemble: modulation violates the [C1, C2] bounds");
      }
  }

  KernelAssembly out;
  out.grid = grid;
  out.p = spec.p;
  out.s = spec.s;
  const int n = grid.n;
  out.W = Eigen::MatrixXd::Zero(n, n);
  out.kappa = Eigen::VectorXd::Zero(n);

  const bool pure = spec.family == KernelFamily::pure_fractional;
  if (grid.dim == 1) {
    const double beta = 1.0 + spec.ps();
    const double a = grid.edge(0, 0), b = grid.edge(0, grid.cells[0]);
    for (int i = 0; i < n; ++i) {
      const auto ci = grid.cell_interval(i, 0);
      for (int j = i + 1; j < n; ++j) {
        const auto cj = grid.cell_interval(j, 0);
        const double w =
            pure ? detail::pure_pair_1d(spec.C, beta, ci[0], ci[1], cj[0], cj[1])
                 : detail::modulated_pair_1d(spec, ci[0], ci[1], cj[0], cj[1],
                                             opts.modulation_subdiv);
        out.W(i, j) = w;
        out.W(j, i) = w;
      }
      out.kappa(i) = pure ? detail::pure_kappa_1d(spec.C, beta, a, b, ci[0], ci[1])
                          : detail::modulated_kappa_1d(spec, grid, i, opts);
    }
  } else {
    const double ps = spec.ps();
    const detail::Rect dom{grid.edge(0, 0), grid.edge(0, grid.cells[0]), grid.edge(1, 0),
                   grid.edge(1, grid.cells[1])};
    auto cell_rect = [&](int i) {
      const auto cx = grid.cell_interval(i, 0);
      const auto cy = grid.cell_interval(i, 1);
      return detail::Rect{cx[0], cx[1], cy[0], cy[1]};
    };
    auto pair_value = [&](int i, int j, int order) {
      const auto A = cell_rect(i);
      const auto B = cell_rect(j);
      return pure ? detail::pure_pair_2d(spec.C, ps, A, B, order)
                  : detail::modulated_pair_2d(spec, A, B, opts.modulation_subdiv, order);
    };
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double w = pair_value(i, j, opts.angular_order);
        out.W(i, j) = w;
        out.W(j, i) = w;
      }
      out.kappa(i) = pure ? detail::pure_kappa_2d(spec.C, ps, cell_rect(i), dom,
                                                  opts.angular_order)
                          : detail::modulated_kappa_2d(spec, grid, i, opts);
    }
    if (opts.verify) {
      double worst = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          const double w2 = pair_value(i, j, 2 * opts.angular_order);
          if (out.W(i, j) != 0.0)
            worst = std::max(worst, std::abs(w2 - out.W(i, j)) / std::abs(out.W(i, j)));
        }
      if (worst > opts.verify_tol)
        throw std::runtime_error("assemble: 2D quadrature not converged (rel drift " +
                                 std::to_string(worst) + ")");
    }
  }
  return out;
}

}  // namespace rearropt
