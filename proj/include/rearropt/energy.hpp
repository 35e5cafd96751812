#pragma once

#include <stdexcept>

#include "rearropt/field.hpp"
#include "rearropt/kernel.hpp"

namespace rearropt {

namespace detail {
inline void check_size(const KernelAssembly& asmb, const Field& u, const char* who) {
  if (u.size() != asmb.grid.n)
    throw std::invalid_argument(std::string(who) + ": field size does not match grid");
}
}  // namespace detail

/// Discrete p-seminorm  E_K(u) = sum_{i != j} |u_i - u_j|^p W_ij + 2 sum_i |u_i|^p kappa_i.
/// The exterior term carries the factor 2 so that E_K discretizes the full
/// double integral with zero extension outside the domain.
inline double seminorm_p(const KernelAssembly& asmb, const Field& u) {
  detail::check_size(asmb, u, "seminorm_p");
  const int n = asmb.grid.n;
  const double p = asmb.p;
  double acc = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = j + 1; i < n; ++i)
      acc += 2.0 * detail::pow_abs(u[i] - u[j], p) * asmb.W(i, j);
  for (int i = 0; i < n; ++i) acc += 2.0 * detail::pow_abs(u[i], p) * asmb.kappa(i);
  return acc;
}

/// Exact gradient of seminorm_p.
inline Field seminorm_grad(const KernelAssembly& asmb, const Field& u) {
  detail::check_size(asmb, u, "seminorm_grad");
  const int n = asmb.grid.n;
  const double p = asmb.p;
  Field g = Field::Zero(n);
  for (int j = 0; j < n; ++j)
    for (int i = j + 1; i < n; ++i) {
      const double t = 2.0 * p * detail::pow_signed(u[i] - u[j], p) * asmb.W(i, j);
      g[i] += t;
      g[j] -= t;
    }
  for (int i = 0; i < n; ++i) g[i] += 2.0 * p * detail::pow_signed(u[i], p) * asmb.kappa(i);
  return g;
}

/// sum_i g_i |u_i|^p mu
inline double weighted_mass(const Grid& grid, const Field& g, const Field& u, double p) {
  if (g.size() != grid.n || u.size() != grid.n)
    throw std::invalid_argument("weighted_mass: field size does not match grid");
  double acc = 0.0;
  for (int i = 0; i < grid.n; ++i) acc += g[i] * detail::pow_abs(u[i], p);
  return acc * grid.cell_measure;
}

/// Gradient of weighted_mass in u:  p g_i |u_i|^{p-2} u_i mu.
inline Field weighted_mass_grad(const Grid& grid, const Field& g, const Field& u, double p) {
  Field out = Field::Zero(grid.n);
  for (int i = 0; i < grid.n; ++i)
    out[i] = p * g[i] * detail::pow_signed(u[i], p) * grid.cell_measure;
  return out;
}

}  // namespace rearropt
