#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "rearropt/optimize.hpp"

using namespace rearropt;

namespace {

KernelAssembly make_assembly(double p, double s, int n) {
  Grid grid = build_grid(1, {{{0.0, 1.0}, {0.0, 1.0}}}, {n, 1});
  KernelSpec spec;
  spec.p = p;
  spec.s = s;
  return assemble(grid, spec);
}

}  // namespace

TEST_CASE("eigenvalue minimization attains the enumerated optimum on a small class") {
  KernelAssembly asmb = make_assembly(2.0, 0.4, 8);
  RearrangementClass cls = RearrangementClass::from_generator(binary_generator(8, 0.5, 1.0));
  OptimizeOptions opts;
  opts.seed = 42;
  opts.restarts = 5;
  OptimizationTrace tr = minimize_eigenvalue(asmb, cls, opts);
  std::vector<Field> members = enumerate_class(cls);
  REQUIRE(members.size() == 70);
  double best = -1.0;
  for (const Field& m : members) best = std::max(best, phi_eigen(asmb, m, opts.eigen));
  REQUIRE(tr.best.phi == Catch::Approx(best).epsilon(1e-9));
  REQUIRE(cls.membership(tr.best.g));
}

TEST_CASE("energy maximization attains the enumerated optimum on a small class") {
  KernelAssembly asmb = make_assembly(2.0, 0.4, 8);
  RearrangementClass cls = RearrangementClass::from_generator(binary_generator(8, 0.5, 1.0));
  ReactionSpec zero = ReactionSpec::zero(8);
  OptimizeOptions opts;
  opts.seed = 42;
  opts.restarts = 5;
  OptimizationTrace tr = maximize_energy(asmb, cls, zero, opts);
  // reference energies via the exact linear solve (p = 2, no reaction)
  Eigen::MatrixXd A = p2_stiffness(asmb);
  auto exact_energy = [&](const Field& g) {
    Eigen::VectorXd u = A.ldlt().solve(Eigen::VectorXd(asmb.grid.cell_measure * g));
    return 0.5 * asmb.grid.cell_measure * g.dot(u);
  };
  double best = -1.0;
  for (const Field& m : enumerate_class(cls)) best = std::max(best, exact_energy(m));
  REQUIRE(tr.best.phi == Catch::Approx(best).epsilon(1e-9));
}

TEST_CASE("objective is nondecreasing along the iteration") {
  KernelAssembly asmb = make_assembly(3.0, 0.3, 32);
  RearrangementClass cls = RearrangementClass::from_generator(binary_generator(32, 0.25, 1.0));
  OptimizeOptions opts;
  opts.seed = 9;
  opts.restarts = 2;
  OptimizationTrace tr = minimize_eigenvalue(asmb, cls, opts);
  for (std::size_t k = 1; k < tr.iterations.size(); ++k)
    REQUIRE(tr.iterations[k].phi >= tr.iterations[k - 1].phi - 1e-12);
  REQUIRE(tr.iterations.size() <= 101);
}

TEST_CASE("fixed point is comonotone with its derivative field") {
  for (auto [p, s] : {std::pair{2.0, 0.4}, std::pair{3.0, 0.3}}) {
    KernelAssembly asmb = make_assembly(p, s, 48);
    RearrangementClass cls =
        RearrangementClass::from_generator(binary_generator(48, 0.25, 1.0));
    OptimizeOptions opts;
    opts.seed = 3;
    opts.restarts = 1;
    OptimizationTrace tr = minimize_eigenvalue(asmb, cls, opts);
    REQUIRE(tr.terminated_by == Termination::fixed_point);
    EigenResult r = principal_eigen(asmb, tr.best.g, opts.eigen);
    Field w = derivative_direction_eigen(r, p);
    INFO("p=" << p);
    REQUIRE(is_comonotone(tr.best.g, w, 1e-9));
  }
}

TEST_CASE("mixture of distinct members is strictly suboptimal for the eigen objective") {
  KernelAssembly asmb = make_assembly(2.0, 0.4, 8);
  RearrangementClass cls = RearrangementClass::from_generator(binary_generator(8, 0.5, 1.0));
  OptimizeOptions opts;
  opts.seed = 1;
  OptimizationTrace tr = minimize_eigenvalue(asmb, cls, opts);
  std::vector<Field> members = enumerate_class(cls);
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
  int tested = 0;
  while (tested < 10) {
    const Field& a = members[pick(rng)];
    const Field& b = members[pick(rng)];
    if ((a - b).cwiseAbs().maxCoeff() == 0.0) continue;
    ClosureElement mix = mixture(cls, {a, b}, {0.5, 0.5});
    REQUIRE(phi_eigen(asmb, mix.values, opts.eigen) < tr.best.phi - 1e-12);
    ++tested;
  }
}

TEST_CASE("phi is convex along mixture segments") {
  KernelAssembly asmb = make_assembly(2.0, 0.4, 12);
  RearrangementClass cls = RearrangementClass::from_generator(binary_generator(12, 0.5, 1.0));
  std::vector<Field> members = enumerate_class(cls);
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
  EigenOptions eo;
  for (int seg = 0; seg < 15; ++seg) {
    const Field& a = members[pick(rng)];
    const Field& b = members[pick(rng)];
    if ((a - b).cwiseAbs().maxCoeff() == 0.0) continue;
    const double fa = phi_eigen(asmb, a, eo), fb = phi_eigen(asmb, b, eo);
    for (double t : {0.25, 0.5, 0.75}) {
      Field mid = (1.0 - t) * a + t * b;
      const double fm = phi_eigen(asmb, mid, eo);
      // convexity: phi(mid) <= linear interpolation, up to solver noise
      REQUIRE(fm <= (1.0 - t) * fa + t * fb + 1e-10);
    }
  }
}

TEST_CASE("directional derivative of the eigen objective matches finite differences") {
  KernelAssembly asmb = make_assembly(2.0, 0.4, 16);
  RearrangementClass cls = RearrangementClass::from_generator(binary_generator(16, 0.5, 1.0));
  std::vector<Field> members = enumerate_class(cls);
  std::mt19937_64 rng(29);
  std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
  EigenOptions eo;
  Field g = cls.generator;
  EigenResult r = principal_eigen(asmb, g, eo);
  Field w = derivative_direction_eigen(r, asmb.p);
  const double tau = 1e-4;
  int tested = 0;
  while (tested < 20) {
    const Field& h = members[pick(rng)];
    if ((h - g).cwiseAbs().maxCoeff() == 0.0) continue;
    const double predicted = asmb.grid.cell_measure * w.dot(h - g);
    const double fd =
        (phi_eigen(asmb, Field(g + tau * (h - g)), eo) - phi_eigen(asmb, g, eo)) / tau;
    INFO("direction " << tested);
    REQUIRE(fd == Catch::Approx(predicted).epsilon(1e-3));
    ++tested;
  }
}

TEST_CASE("directional derivative of the energy objective matches finite differences") {
  KernelAssembly asmb = make_assembly(2.0, 0.4, 16);
  RearrangementClass cls = RearrangementClass::from_generator(binary_generator(16, 0.5, 1.0));
  ReactionSpec zero = ReactionSpec::zero(16);
  std::vector<Field> members = enumerate_class(cls);
  std::mt19937_64 rng(37);
  std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
  DirichletOptions d;
  Field g = cls.generator;
  SolveResult r = solve_dirichlet(asmb, g, zero, d);
  const double tau = 1e-4;
  int tested = 0;
  while (tested < 20) {
    const Field& k = members[pick(rng)];
    if ((k - g).cwiseAbs().maxCoeff() == 0.0) continue;
    const double predicted = asmb.grid.cell_measure * r.u.dot(k - g);
    const double fd = (phi_energy(asmb, zero, Field(g + tau * (k - g)), d) - r.energy) / tau;
    INFO("direction " << tested);
    REQUIRE(fd == Catch::Approx(predicted).epsilon(1e-3));
    ++tested;
  }
}
