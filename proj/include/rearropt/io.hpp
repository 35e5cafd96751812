#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "rearropt/grid.hpp"
#include "rearropt/optimize.hpp"

namespace rearropt {

/// Shortest decimal string that round-trips the double exactly.
inline std::string format_double(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw std::runtime_error("format_double: to_chars failed");
  return std::string(buf, end);
}

inline void write_field_csv(const std::filesystem::path& path, const Grid& grid,
                            const Field& v) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << (grid.dim == 1 ? "cell,x,value\n" : "cell,x,y,value\n");
  for (int i = 0; i < grid.n; ++i) {
    out << i << ',' << format_double(grid.centers[i][0]);
    if (grid.dim == 2) out << ',' << format_double(grid.centers[i][1]);
    out << ',' << format_double(v[i]) << '\n';
  }
  if (!out) throw std::runtime_error("short write to " + path.string());
}

inline void write_trace_csv(const std::filesystem::path& path, const OptimizationTrace& tr) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "k,lambda,phi,inner_iterations,inner_residual\n";
  for (std::size_t k = 0; k < tr.iterations.size(); ++k) {
    const IterationRecord& r = tr.iterations[k];
    out << k << ',';
    if (!std::isnan(r.lambda)) out << format_double(r.lambda);  // empty for energy runs
    out << ',' << format_double(r.phi) << ',' << r.inner_iterations << ','
        << format_double(r.inner_residual) << '\n';
  }
  if (!out) throw std::runtime_error("short write to " + path.string());
}

}  // namespace rearropt
