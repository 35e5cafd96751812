#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "rearropt/kernel.hpp"

namespace rearropt {

/// Content hash identifying an assembled (W, kappa) pair: grid geometry,
/// kernel parameters (modulated kernels by name), and assembly options.
inline std::uint64_t assembly_key(const Grid& grid, const KernelSpec& spec,
                                  const AssemblyOptions& opts = {}) {
  std::uint64_t h = detail::fnv1a(nullptr, 0);
  auto mix_d = [&](double x) { h = detail::fnv1a(&x, sizeof(x), h); };
  auto mix_i = [&](std::int64_t x) { h = detail::fnv1a(&x, sizeof(x), h); };
  mix_i(grid.dim);
  for (int a = 0; a < grid.dim; ++a) {
    mix_d(grid.lo[a]);
    mix_d(grid.hi[a]);
    mix_i(grid.cells[a]);
  }
  mix_d(spec.p);
  mix_d(spec.s);
  mix_i(static_cast<std::int64_t>(spec.family));
  mix_d(spec.C);
  mix_d(spec.C1);
  mix_d(spec.C2);
  h = detail::fnv1a(spec.modulation_name.data(), spec.modulation_name.size(), h);
  mix_i(opts.angular_order);
  mix_i(opts.radial_order);
  mix_i(opts.modulation_subdiv);
  mix_i(opts.graded_depth);
  return h;
}

namespace detail {

constexpr std::uint64_t cache_magic = 0x4b41534d42573031ull;  // "KASMBW01"

}  // namespace detail

/// Writes W (row-major) and kappa as little-endian doubles behind a small
/// header: magic, key, n.
inline void save_assembly(const std::filesystem::path& path, const KernelAssembly& asmb,
                          std::uint64_t key) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cache: cannot write " + path.string());
  auto put = [&](const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  };
  const std::uint64_t n = static_cast<std::uint64_t>(asmb.kappa.size());
  put(&detail::cache_magic, 8);
  put(&key, 8);
  put(&n, 8);
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint64_t j = 0; j < n; ++j) {
      const double w = asmb.W(static_cast<int>(i), static_cast<int>(j));
      put(&w, 8);
    }
  put(asmb.kappa.data(), n * 8);
  if (!out) throw std::runtime_error("cache: short write to " + path.string());
}

/// Loads a cached assembly if the file exists and its key matches; returns
/// false otherwise. Grid and kernel parameters are restored from the caller's
/// objects, which the key guarantees to be consistent.
inline bool load_assembly(const std::filesystem::path& path, const Grid& grid,
                          const KernelSpec& spec, std::uint64_t key, KernelAssembly& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::uint64_t magic = 0, file_key = 0, n = 0;
  in.read(reinterpret_cast<char*>(&magic), 8);
  in.read(reinterpret_cast<char*>(&file_key), 8);
  in.read(reinterpret_cast<char*>(&n), 8);
  if (!in || magic != detail::cache_magic || file_key != key) return false;
  if (n != static_cast<std::uint64_t>(grid.n)) return false;
  KernelAssembly a;
  a.grid = grid;
  a.p = spec.p;
  a.s = spec.s;
  a.W.resize(static_cast<int>(n), static_cast<int>(n));
  a.kappa.resize(static_cast<int>(n));
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint64_t j = 0; j < n; ++j) {
      double w;
      in.read(reinterpret_cast<char*>(&w), 8);
      a.W(static_cast<int>(i), static_cast<int>(j)) = w;
    }
  in.read(reinterpret_cast<char*>(a.kappa.data()), static_cast<std::streamsize>(n * 8));
  if (!in) return false;
  out = std::move(a);
  return true;
}

/// Assembles, consulting/refreshing the cache file when a directory is given.
inline KernelAssembly assemble_cached(const Grid& grid, const KernelSpec& spec,
                                      const AssemblyOptions& opts,
                                      const std::filesystem::path& cache_dir) {
  const std::uint64_t key = assembly_key(grid, spec, opts);
  std::ostringstream name;
  name << "assembly-" << std::hex << key << ".bin";
  const std::filesystem::path path = cache_dir / name.str();
  KernelAssembly a;
  if (load_assembly(path, grid, spec, key, a)) return a;
  a = assemble(grid, spec, opts);
  std::filesystem::create_directories(cache_dir);
  save_assembly(path, a, key);
  return a;
}

}  // namespace rearropt
