#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "rearropt/energy.hpp"

namespace rearropt {

struct EigenOptions {
  double tol_residual = 1e-8;  // Euler-Lagrange defect, relative to lambda
  double tol_decrease = 1e-10; // converged when the relative quotient decrease drops below
  int max_iters = 50000;
  std::uint64_t seed = 0;
  int multi_starts = 0;        // extra seeded random starts on top of the default one
  const Field* init = nullptr; // warm start (overrides the default initializer)
};

struct EigenResult {
  double lambda = 0.0;
  Field u;
  int iterations = 0;
  double residual = 0.0;              // sup-norm of the Euler-Lagrange defect
  double normalization_defect = 0.0;  // |weighted_mass(g, u, p) - 1|
};

/// Rayleigh quotient  E_K(u) / integral g |u|^p dx.
inline double rayleigh(const KernelAssembly& asmb, const Field& g, const Field& u) {
  const double m = weighted_mass(asmb.grid, g, u, asmb.p);
  if (!(m > 0.0))
    throw std::invalid_argument("rayleigh: u is not supported on {g > 0}");
  return seminorm_p(asmb, u) / m;
}

namespace detail {

struct DescentState {
  Field u;
  double lambda;
  int iterations;
  double residual;
};

/// Projected gradient descent on the Rayleigh quotient over the nonnegative
/// cone: gradient step, cell-wise absolute value (which cannot increase the
/// quotient since E_K(|u|) <= E_K(u)), renormalization to unit weighted mass.
inline DescentState rayleigh_descent(const KernelAssembly& asmb, const Field& g, Field u,
                                     const EigenOptions& opts) {
  const Grid& grid = asmb.grid;
  const double p = asmb.p;
  auto project = [&](Field v) {
    v = v.cwiseAbs();
    const double m = weighted_mass(grid, g, v, p);
    if (!(m > 0.0)) return Field();
    v *= std::pow(m, -1.0 / p);
    return v;
  };
  u = project(u);
  if (u.size() == 0)
    throw std::invalid_argument("principal_eigen: initializer has zero weighted mass");
  double lam = seminorm_p(asmb, u);
  double step = 1.0;
  int it = 0;
  double resid_norm = std::numeric_limits<double>::infinity();
  for (; it < opts.max_iters; ++it) {
    const Field grad_e = seminorm_grad(asmb, u);
    const Field grad_m = weighted_mass_grad(grid, g, u, p);
    const Field resid = grad_e - lam * grad_m;
    resid_norm = resid.lpNorm<Eigen::Infinity>();
    const double dir2 = resid.squaredNorm();
    double t = step;
    Field cand;
    double lam_cand = lam;
    bool moved = false;
    while (t > 1e-18) {
      cand = project(u - t * resid);
      if (cand.size() != 0) {
        lam_cand = seminorm_p(asmb, cand);
        if (lam_cand <= lam - 1e-4 * t * dir2) {
          moved = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!moved) break;
    const double rel_dec = (lam - lam_cand) / std::max(lam, 1e-300);
    u = std::move(cand);
    lam = lam_cand;
    step = std::min(t * 4.0, 1e8);
    if (rel_dec < opts.tol_decrease && resid_norm <= opts.tol_residual * std::max(lam, 1e-300))
      break;
  }
  return {std::move(u), lam, it, resid_norm};
}

}  // namespace detail

/// Principal eigenpair: minimizes the Rayleigh quotient over nonnegative
/// fields, normalized to unit weighted mass. Deterministic for a given seed.
inline EigenResult principal_eigen(const KernelAssembly& asmb, const Field& g,
                                   const EigenOptions& opts = {}) {
  detail::check_size(asmb, g, "principal_eigen");
  if (g.minCoeff() < 0.0) throw std::invalid_argument("principal_eigen: g must be nonnegative");
  if (g.maxCoeff() <= 0.0)
    throw std::invalid_argument("principal_eigen: g is identically zero");
  const int n = asmb.grid.n;

  std::vector<Field> starts;
  if (opts.init != nullptr && opts.init->size() == n && opts.init->cwiseAbs().maxCoeff() > 0.0) {
    starts.push_back(*opts.init);
  } else {
    Field ind = Field::Zero(n);
    for (int i = 0; i < n; ++i) ind[i] = g[i] > 0.0 ? 1.0 : 0.0;
    starts.push_back(std::move(ind));
  }
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  for (int k = 0; k < opts.multi_starts; ++k) {
    Field r(n);
    for (int i = 0; i < n; ++i) r[i] = unif(rng);
    starts.push_back(std::move(r));
  }

  bool have = false;
  detail::DescentState best;
  for (auto& s : starts) {
    auto st = detail::rayleigh_descent(asmb, g, std::move(s), opts);
    if (!have || st.lambda < best.lambda) {
      best = std::move(st);
      have = true;
    }
  }
  if (best.residual > opts.tol_residual * std::max(best.lambda, 1e-300) * 10.0 &&
      best.iterations >= opts.max_iters)
    throw std::runtime_error("principal_eigen: no convergence in " +
                             std::to_string(opts.max_iters) + " iterations (residual " +
                             std::to_string(best.residual) + ")");
  EigenResult out;
  out.u = std::move(best.u);
  out.lambda = seminorm_p(asmb, out.u);
  out.iterations = best.iterations;
  out.residual = best.residual;
  out.normalization_defect = std::abs(weighted_mass(asmb.grid, g, out.u, asmb.p) - 1.0);
  return out;
}

/// Hessian of E_K/2 at p = 2:  A_ii = 2 (sum_j W_ij + kappa_i),  A_ij = -2 W_ij.
inline Eigen::MatrixXd p2_stiffness(const KernelAssembly& asmb) {
  const int n = asmb.grid.n;
  Eigen::MatrixXd A = -2.0 * asmb.W;
  for (int i = 0; i < n; ++i) A(i, i) = 2.0 * (asmb.W.row(i).sum() + asmb.kappa(i));
  return A;
}

/// Dense generalized symmetric eigensolve oracle, valid only at p = 2.
/// Cells with g_i = 0 are removed by a Schur-complement deflation.
inline double p2_oracle(const KernelAssembly& asmb, const Field& g) {
  if (asmb.p != 2.0) throw std::invalid_argument("p2_oracle: requires p == 2");
  detail::check_size(asmb, g, "p2_oracle");
  const int n = asmb.grid.n;
  const Eigen::MatrixXd A = p2_stiffness(asmb);
  std::vector<int> sup, zer;
  for (int i = 0; i < n; ++i) (g[i] > 0.0 ? sup : zer).push_back(i);
  if (sup.empty()) throw std::invalid_argument("p2_oracle: g is identically zero");
  const int ns = static_cast<int>(sup.size());
  Eigen::MatrixXd As(ns, ns);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(ns, ns);
  for (int a = 0; a < ns; ++a) {
    M(a, a) = g[sup[a]] * asmb.grid.cell_measure;
    for (int b = 0; b < ns; ++b) As(a, b) = A(sup[a], sup[b]);
  }
  if (!zer.empty()) {
    const int nz = static_cast<int>(zer.size());
    Eigen::MatrixXd Azz(nz, nz), Azs(nz, ns);
    for (int a = 0; a < nz; ++a) {
      for (int b = 0; b < nz; ++b) Azz(a, b) = A(zer[a], zer[b]);
      for (int b = 0; b < ns; ++b) Azs(a, b) = A(zer[a], sup[b]);
    }
    As -= Azs.transpose() * Azz.ldlt().solve(Azs);
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(As, M);
  if (es.info() != Eigen::Success) throw std::runtime_error("p2_oracle: eigensolve failed");
  return es.eigenvalues()(0);
}

/// Rescaled eigenfunction  u / lambda^{2/p}  (the unique maximizer of F(g, .)).
inline Field tilde_u(const EigenResult& r, double p) {
  return r.u * std::pow(r.lambda, -2.0 / p);
}

/// F(g, u) = 2 integral g u^p dx - E_K(u)^2; its supremum over nonnegative u
/// equals 1 / lambda(g)^2.
inline double f_functional(const KernelAssembly& asmb, const Field& g, const Field& u) {
  const double e = seminorm_p(asmb, u);
  return 2.0 * weighted_mass(asmb.grid, g, u, asmb.p) - e * e;
}

}  // namespace rearropt
