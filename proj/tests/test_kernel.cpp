#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "rearropt/cache.hpp"
#include "rearropt/kernel.hpp"
#include "support/oracles.hpp"

using namespace rearropt;

namespace {

KernelSpec pure_spec(double p, double s) {
  KernelSpec spec;
  spec.p = p;
  spec.s = s;
  return spec;
}

}  // namespace

TEST_CASE("1D pair weights match the quadrature reference") {
  for (auto [p, s] : {std::pair{2.0, 0.4}, std::pair{3.0, 0.3}}) {
    KernelSpec spec = pure_spec(p, s);
    for (int n : {2, 8, 32}) {
      Grid grid = build_grid(1, {{{0.0, 1.0}, {0.0, 1.0}}}, {n, 1});
      KernelAssembly asmb = assemble(grid, spec);
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          auto [a1, b1] = grid.cell_interval(i, 0);
          auto [a2, b2] = grid.cell_interval(j, 0);
          const double ref = oracle::pair_1d(spec, a1, b1, a2, b2);
          INFO("n=" << n << " p=" << p << " s=" << s << " pair " << i << "," << j);
          REQUIRE(asmb.W(i, j) == Catch::Approx(ref).epsilon(1e-8));
          REQUIRE(asmb.W(j, i) == asmb.W(i, j));
        }
    }
  }
}

TEST_CASE("1D exterior weights match the quadrature reference") {
  for (auto [p, s] : {std::pair{2.0, 0.4}, std::pair{3.0, 0.3}}) {
    KernelSpec spec = pure_spec(p, s);
    for (int n : {2, 8, 32}) {
      Grid grid = build_grid(1, {{{0.0, 1.0}, {0.0, 1.0}}}, {n, 1});
      KernelAssembly asmb = assemble(grid, spec);
      for (int i = 0; i < n; ++i) {
        auto [ci, di] = grid.cell_interval(i, 0);
        const double ref = oracle::kappa_1d(spec, 0.0, 1.0, ci, di);
        INFO("n=" << n << " p=" << p << " s=" << s << " cell " << i);
        REQUIRE(asmb.kappa(i) == Catch::Approx(ref).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("assembly entries are positive and symmetric under reflection") {
  KernelSpec spec = pure_spec(2.0, 0.4);
  Grid grid = build_grid(1, {{{0.0, 1.0}, {0.0, 1.0}}}, {16, 1});
  KernelAssembly asmb = assemble(grid, spec);
  for (int i = 0; i < grid.n; ++i) {
    REQUIRE(asmb.kappa(i) > 0.0);
    REQUIRE(asmb.W(i, i) == 0.0);
    for (int j = 0; j < grid.n; ++j)
      if (i != j) REQUIRE(asmb.W(i, j) > 0.0);
  }
  // reflection symmetry of the symmetric domain
  for (int i = 0; i < grid.n; ++i) {
    REQUIRE(asmb.kappa(i) == Catch::Approx(asmb.kappa(grid.n - 1 - i)).epsilon(1e-13));
    for (int j = i + 1; j < grid.n; ++j)
      REQUIRE(asmb.W(i, j) ==
              Catch::Approx(asmb.W(grid.n - 1 - i, grid.n - 1 - j)).epsilon(1e-13));
  }
}

TEST_CASE("ps >= 1 is rejected") {
  Grid grid = build_grid(1, {{{0.0, 1.0}, {0.0, 1.0}}}, {4, 1});
  KernelSpec spec = pure_spec(3.0, 0.5);  // ps = 1.5
  REQUIRE_THROWS_AS(assemble(grid, spec), std::invalid_argument);
}

TEST_CASE("modulated kernel respects the two-sided bounds") {
  KernelSpec spec;
  spec.p = 2.0;
  spec.s = 0.4;
  spec.family = KernelFamily::modulated;
  spec.C1 = 1.0;
  spec.C2 = 2.0;
  spec.modulation = checkerboard_modulation(1.0, 2.0);
  spec.modulation_name = "checkerboard";
  Grid grid = build_grid(1, {{{0.0, 1.0}, {0.0, 1.0}}}, {8, 1});
  KernelAssembly mod = assemble(grid, spec);

  KernelSpec lo = pure_spec(2.0, 0.4), hi = pure_spec(2.0, 0.4);
  lo.C = 1.0;
  hi.C = 2.0;
  KernelAssembly alo = assemble(grid, lo), ahi = assemble(grid, hi);
  for (int i = 0; i < grid.n; ++i) {
    REQUIRE(mod.kappa(i) >= alo.kappa(i) * (1.0 - 1e-9));
    REQUIRE(mod.kappa(i) <= ahi.kappa(i) * (1.0 + 1e-9));
    for (int j = i + 1; j < grid.n; ++j) {
      REQUIRE(mod.W(i, j) >= alo.W(i, j) * (1.0 - 1e-9));
      REQUIRE(mod.W(i, j) <= ahi.W(i, j) * (1.0 + 1e-9));
      REQUIRE(mod.W(i, j) == mod.W(j, i));
    }
  }
}

TEST_CASE("modulated 1D pair weights match the quadrature reference") {
  KernelSpec spec;
  spec.p = 2.0;
  spec.s = 0.4;
  spec.family = KernelFamily::modulated;
  spec.C1 = 1.0;
  spec.C2 = 2.0;
  spec.modulation = checkerboard_modulation(1.0, 2.0);
  spec.modulation_name = "checkerboard";
  Grid grid = build_grid(1, {{{0.0, 1.0}, {0.0, 1.0}}}, {8, 1});
  AssemblyOptions opts;
  opts.modulation_subdiv = 8;
  KernelAssembly asmb = assemble(grid, spec, opts);
  for (int i = 0; i < grid.n; ++i)
    for (int j = i + 1; j < grid.n; ++j) {
      auto [a1, b1] = grid.cell_interval(i, 0);
      auto [a2, b2] = grid.cell_interval(j, 0);
      const double ref = oracle::pair_1d(spec, a1, b1, a2, b2);
      INFO("pair " << i << "," << j);
      REQUIRE(asmb.W(i, j) == Catch::Approx(ref).epsilon(1e-3));
    }
}

TEST_CASE("2D separated pair weights match a tensor quadrature reference") {
  KernelSpec spec = pure_spec(2.0, 0.4);
  Grid grid = build_grid(2, {{{0.0, 1.0}, {0.0, 1.0}}}, {4, 4});
  KernelAssembly asmb = assemble(grid, spec);
  int checked = 0;
  for (int i = 0; i < grid.n && checked < 12; ++i)
    for (int j = i + 1; j < grid.n && checked < 12; ++j) {
      const auto ci = grid.coords(i), cj = grid.coords(j);
      if (std::abs(ci[0] - cj[0]) <= 1 && std::abs(ci[1] - cj[1]) <= 1) continue;
      auto ax = grid.cell_interval(i, 0), ay = grid.cell_interval(i, 1);
      auto bx = grid.cell_interval(j, 0), by = grid.cell_interval(j, 1);
      const double ref = oracle::pair_2d_separated(spec, {ax[0], ay[0]}, {ax[1], ay[1]},
                                                   {bx[0], by[0]}, {bx[1], by[1]}, 2, 10);
      INFO("pair " << i << "," << j);
      REQUIRE(asmb.W(i, j) == Catch::Approx(ref).epsilon(1e-8));
      ++checked;
    }
  REQUIRE(checked == 12);
}

TEST_CASE("2D assembly passes self-verification at doubled angular order") {
  KernelSpec spec = pure_spec(3.0, 0.3);
  Grid grid = build_grid(2, {{{0.0, 1.0}, {0.0, 1.0}}}, {3, 3});
  AssemblyOptions opts;
  opts.verify = true;
  opts.verify_tol = 1e-6;
  REQUIRE_NOTHROW(assemble(grid, spec, opts));
}

TEST_CASE("assembly cache round-trips bit-exactly") {
  KernelSpec spec = pure_spec(2.0, 0.4);
  Grid grid = build_grid(1, {{{0.0, 1.0}, {0.0, 1.0}}}, {12, 1});
  AssemblyOptions opts;
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "rearropt-cache-test";
  std::filesystem::remove_all(dir);
  KernelAssembly first = assemble_cached(grid, spec, opts, dir);
  KernelAssembly second = assemble_cached(grid, spec, opts, dir);  // served from disk
  REQUIRE((first.W - second.W).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((first.kappa - second.kappa).cwiseAbs().maxCoeff() == 0.0);
  // different parameters must miss the cache
  KernelSpec other = pure_spec(2.0, 0.3);
  KernelAssembly third = assemble_cached(grid, other, opts, dir);
  REQUIRE(third.kappa(0) != first.kappa(0));
  std::filesystem::remove_all(dir);
}
