#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>

namespace rearropt {

/// Cell-wise constant function on the grid, extended by zero outside the domain.
using Field = Eigen::VectorXd;

/// Coordinates of a point; the second component is unused in 1D.
using Point = std::array<double, 2>;

namespace detail {

/// |t|^p with fast paths for the integer exponents used throughout.
inline double pow_abs(double t, double p) {
  const double a = std::abs(t);
  if (p == 2.0) return a * a;
  if (p == 3.0) return a * a * a;
  if (p == 1.0) return a;
  if (a == 0.0) return 0.0;
  return std::pow(a, p);
}

/// |t|^{p-2} t, with the minimal-selection convention 0 at t = 0 (needed for p < 2).
inline double pow_signed(double t, double p) {
  if (p == 2.0) return t;
  if (p == 3.0) return std::abs(t) * t;
  if (t == 0.0) return 0.0;
  const double mag = std::pow(std::abs(t), p - 1.0);
  return t > 0.0 ? mag : -mag;
}

/// FNV-1a, used for content keys of caches and configs.
inline std::uint64_t fnv1a(const void* data, std::size_t len,
                           std::uint64_t h = 1469598103934665603ull) {
  const auto* b = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= b[i];
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace detail
}  // namespace rearropt
