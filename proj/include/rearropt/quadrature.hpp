#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

namespace rearropt {
namespace detail {

struct GaussRule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

/// Gauss-Legendre nodes/weights on [-1,1], computed once per order by Newton
/// iteration on the Legendre recurrence.
inline const GaussRule& gauss_legendre(int order) {
  static std::map<int, GaussRule> cache;
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;
  GaussRule r;
  r.x.resize(order);
  r.w.resize(order);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < order; ++i) {
    double x = std::cos(pi * (i + 0.75) / (order + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.x[i] = x;
    r.w[i] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
  std::reverse(r.x.begin(), r.x.end());
  std::reverse(r.w.begin(), r.w.end());
  return cache.emplace(order, std::move(r)).first->second;
}

/// Overlap measure t -> |A cap (B - t)| for intervals A, B. Piecewise linear
/// with the four breakpoints returned by breakpoints().
struct Overlap1D {
  double la, ha, lb, hb;
  double operator()(double t) const {
    const double v = std::min(ha, hb - t) - std::max(la, lb - t);
    return v > 0.0 ? v : 0.0;
  }
  std::array<double, 4> breakpoints() const {
    std::array<double, 4> b{lb - ha, lb - la, hb - ha, hb - la};
    std::sort(b.begin(), b.end());
    return b;
  }
};

struct Box2 {
  double x0, x1, y0, y1;
};

/// Ray-box intersection from the origin along (c, s); returns false on miss.
inline bool ray_box(const Box2& b, double c, double s, double& t0, double& t1) {
  t0 = 0.0;
  t1 = std::numeric_limits<double>::infinity();
  const double o[2] = {0.0, 0.0};
  const double d[2] = {c, s};
  const double lo[2] = {b.x0, b.y0};
  const double hi[2] = {b.x1, b.y1};
  for (int a = 0; a < 2; ++a) {
    if (std::abs(d[a]) < 1e-300) {
      if (o[a] < lo[a] || o[a] > hi[a]) return false;
    } else {
      double ta = (lo[a] - o[a]) / d[a];
      double tb = (hi[a] - o[a]) / d[a];
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t0 > t1) return false;
    }
  }
  return t1 > 0.0;
}

/// Integrates r^{1-alpha} * Q(r) over [ra, rb], where Q is the quadratic
/// interpolating f at ra, (ra+rb)/2, rb. Exact whenever f is quadratic on the
/// piece. Requires f(0) = 0 when ra = 0 (integrability of the leading term).
template <class F>
double radial_piece(double alpha, double ra, double rb, F&& f) {
  const double rm = 0.5 * (ra + rb);
  const double fa = f(ra), fm = f(rm), fb = f(rb);
  if (fa == 0.0 && fm == 0.0 && fb == 0.0) return 0.0;
  const double d1 = (fm - fa) / (rm - ra);
  const double d2 = ((fb - fm) / (rb - rm) - d1) / (rb - ra);
  const double A = fa - d1 * ra + d2 * ra * rm;  // exact 0 when ra = 0, fa = 0
  const double B = d1 - d2 * (ra + rm);
  const double C = d2;
  const double k0 = 2.0 - alpha;
  auto P = [&](double k) { return (std::pow(rb, k) - std::pow(ra, k)) / k; };
  double acc = 0.0;
  if (ra > 0.0) {
    acc += A * P(k0);
  } else if (A != 0.0) {
    throw std::runtime_error("radial_piece: non-integrable singularity at r = 0");
  }
  acc += B * P(k0 + 1.0) + C * P(k0 + 2.0);
  return acc;
}

/// Polar evaluation of  integral_D |z|^{-alpha} F(z) dz  where F is piecewise
/// bi-quadratic (in practice a product of piecewise-linear overlap profiles)
/// supported on the box D, with breakpoint lines z1 = bx[k], z2 = by[k].
/// Radial integration is analytic per piece; only the angular quadrature
/// (Gauss of `order` per smooth arc) is approximate. F(0) must vanish if the
/// origin lies in the closure of D.
template <class F>
double polar_integral(double alpha, const Box2& D, const std::array<double, 4>& bx,
                      const std::array<double, 4>& by, F&& f, int order) {
  const double pi = 3.14159265358979323846;
  std::vector<double> ang;
  ang.reserve(22);
  auto push = [&](double a) {
    a = std::fmod(a, 2.0 * pi);
    if (a < 0.0) a += 2.0 * pi;
    ang.push_back(a);
  };
  for (double vx : bx)
    for (double vy : by)
      if (vx != 0.0 || vy != 0.0) push(std::atan2(vy, vx));
  push(0.0);
  push(0.5 * pi);
  push(pi);
  push(1.5 * pi);
  std::sort(ang.begin(), ang.end());
  ang.erase(std::unique(ang.begin(), ang.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-13; }),
            ang.end());
  const auto& gl = gauss_legendre(order);
  double total = 0.0;
  const std::size_t na = ang.size();
  for (std::size_t k = 0; k < na; ++k) {
    const double a0 = ang[k];
    const double a1 = (k + 1 < na) ? ang[k + 1] : ang[0] + 2.0 * pi;
    const double half = 0.5 * (a1 - a0);
    if (half < 1e-13) continue;
    const double mid = 0.5 * (a0 + a1);
    for (int q = 0; q < order; ++q) {
      const double th = mid + half * gl.x[q];
      const double c = std::cos(th), s = std::sin(th);
      double t0, t1;
      if (!ray_box(D, c, s, t0, t1)) continue;
      double radii[12];
      int nr = 0;
      radii[nr++] = t0;
      auto add_r = [&](double r) {
        if (r > t0 * (1.0 + 1e-14) + 1e-300 && r < t1 * (1.0 - 1e-14)) radii[nr++] = r;
      };
      if (std::abs(c) > 1e-12)
        for (double v : bx) add_r(v / c);
      if (std::abs(s) > 1e-12)
        for (double v : by) add_r(v / s);
      radii[nr++] = t1;
      std::sort(radii, radii + nr);
      double acc = 0.0;
      for (int j = 0; j + 1 < nr; ++j) {
        const double ra = radii[j], rb = radii[j + 1];
        if (rb - ra < 1e-15 * (1.0 + rb)) continue;
        acc += radial_piece(alpha, ra, rb, [&](double r) { return f(r * c, r * s); });
      }
      total += half * gl.w[q] * acc;
    }
  }
  return total;
}

/// integral over the complement of box S (origin strictly inside) of |z|^{-(2+ps)} dz.
inline double box_complement_integral(double ps, const Box2& S, int order) {
  const double pi = 3.14159265358979323846;
  double ang[4] = {std::atan2(S.y0, S.x0), std::atan2(S.y0, S.x1), std::atan2(S.y1, S.x0),
                   std::atan2(S.y1, S.x1)};
  std::vector<double> a(ang, ang + 4);
  for (auto& v : a)
    if (v < 0.0) v += 2.0 * pi;
  a.push_back(0.0);
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end(),
                      [](double x, double y) { return std::abs(x - y) < 1e-13; }),
          a.end());
  const auto& gl = gauss_legendre(order);
  double total = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double a0 = a[k];
    const double a1 = (k + 1 < a.size()) ? a[k + 1] : a[0] + 2.0 * pi;
    const double half = 0.5 * (a1 - a0);
    if (half < 1e-13) continue;
    const double mid = 0.5 * (a0 + a1);
    for (int q = 0; q < order; ++q) {
      const double th = mid + half * gl.x[q];
      double t0, t1;
      if (!ray_box(S, std::cos(th), std::sin(th), t0, t1))
        throw std::runtime_error("box_complement_integral: origin outside box");
      total += half * gl.w[q] * std::pow(t1, -ps) / ps;
    }
  }
  return total;
}

/// Dyadic partition of [a, b] graded toward `toward` (one of a or b); returns
/// edge list. depth = number of halvings; the finest panel is kept (not dropped).
inline std::vector<double> graded_edges(double a, double b, bool toward_b, int depth) {
  const double len = b - a;
  std::vector<double> e;
  e.reserve(depth + 2);
  if (toward_b) {
    e.push_back(a);
    for (int k = 1; k <= depth; ++k) e.push_back(b - len * std::ldexp(1.0, -k));
    e.push_back(b);
  } else {
    e.push_back(a);
    for (int k = depth; k >= 1; --k) e.push_back(a + len * std::ldexp(1.0, -k));
    e.push_back(b);
  }
  return e;
}

}  // namespace detail
}  // namespace rearropt
