#pragma once

#include <cmath>
#include <stdexcept>

#include "rearropt/energy.hpp"

namespace rearropt {

/// Reaction h(x, t) = c(x) (t_+)^{q-1} with primitive H(x, t) = c(x) (t_+)^q / q.
/// Nondecreasing in t by construction; c == 0 gives the zero reaction.
struct ReactionSpec {
  Field c;      // nonnegative cell-wise coefficient
  double q = 2.0;  // in (1, p)

  void validate(int n, double p) const {
    if (c.size() != n) throw std::invalid_argument("reaction: c size does not match grid");
    if (c.minCoeff() < 0.0) throw std::invalid_argument("reaction: c must be nonnegative");
    if (c.maxCoeff() > 0.0 && !(q > 1.0 && q < p))
      throw std::invalid_argument("reaction: q must lie in (1, p)");
  }

  double h(int i, double t) const {
    if (t <= 0.0 || c[i] == 0.0) return 0.0;
    return c[i] * std::pow(t, q - 1.0);
  }
  double H(int i, double t) const {
    if (t <= 0.0 || c[i] == 0.0) return 0.0;
    return c[i] * std::pow(t, q) / q;
  }

  static ReactionSpec zero(int n) { return {Field::Zero(n), 2.0}; }
};

/// E(g, u) = sum_i [g_i u_i - H(x_i, u_i)] mu - E_K(u)/p.
inline double energy_E(const KernelAssembly& asmb, const Field& g, const ReactionSpec& reac,
                       const Field& u) {
  detail::check_size(asmb, g, "energy_E");
  detail::check_size(asmb, u, "energy_E");
  const Grid& grid = asmb.grid;
  double acc = 0.0;
  for (int i = 0; i < grid.n; ++i) acc += g[i] * u[i] - reac.H(i, u[i]);
  return acc * grid.cell_measure - seminorm_p(asmb, u) / asmb.p;
}

struct DirichletOptions {
  double tol = 1e-9;  // sup-norm of grad J at the returned point
  int max_iters = 50000;
  const Field* init = nullptr;
};

struct SolveResult {
  Field u;
  double energy = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// Maximizer of E(g, .), i.e. the unique solution of the nonlinear Dirichlet
/// problem. Minimizes the strictly convex J = -E by gradient descent with a
/// Barzilai-Borwein step and Armijo safeguard; first order only, since the
/// seminorm Hessian degenerates for p < 2.
inline SolveResult solve_dirichlet(const KernelAssembly& asmb, const Field& g,
                                   const ReactionSpec& reac, const DirichletOptions& opts = {}) {
  detail::check_size(asmb, g, "solve_dirichlet");
  if (g.minCoeff() < 0.0) throw std::invalid_argument("solve_dirichlet: g must be nonnegative");
  reac.validate(asmb.grid.n, asmb.p);
  const Grid& grid = asmb.grid;
  const int n = grid.n;
  const double mu = grid.cell_measure;

  auto J = [&](const Field& u) { return -energy_E(asmb, g, reac, u); };
  auto gradJ = [&](const Field& u) {
    Field gr = seminorm_grad(asmb, u) / asmb.p;
    for (int i = 0; i < n; ++i) gr[i] += (reac.h(i, u[i]) - g[i]) * mu;
    return gr;
  };

  Field u = (opts.init != nullptr && opts.init->size() == n) ? *opts.init : Field::Zero(n);
  double fu = J(u);
  Field gr = gradJ(u);
  double gn = gr.lpNorm<Eigen::Infinity>();
  double step = 1.0 / std::max(1.0, gr.norm());
  int it = 0;
  for (; it < opts.max_iters && gn > opts.tol; ++it) {
    double t = std::clamp(step, 1e-14, 1e14);
    const double dir2 = gr.squaredNorm();
    Field cand;
    double fc = fu;
    bool moved = false;
    while (t > 1e-18) {
      cand = u - t * gr;
      fc = J(cand);
      if (fc <= fu - 1e-4 * t * dir2) {
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
    Field gr_new = gradJ(cand);
    const Field sdiff = cand - u;
    const Field ydiff = gr_new - gr;
    const double sy = sdiff.dot(ydiff);
    step = sy > 0.0 ? sdiff.squaredNorm() / sy : t * 2.0;
    u = std::move(cand);
    fu = fc;
    gr = std::move(gr_new);
    gn = gr.lpNorm<Eigen::Infinity>();
  }
  if (gn > opts.tol * 100.0 && it >= opts.max_iters)
    throw std::runtime_error("solve_dirichlet: no convergence in " +
                             std::to_string(opts.max_iters) +
                             " iterations (residual " + std::to_string(gn) + ")");
  SolveResult out;
  out.u = std::move(u);
  out.energy = energy_E(asmb, g, reac, out.u);
  out.residual = gn;
  out.iterations = it;
  return out;
}

}  // namespace rearropt
