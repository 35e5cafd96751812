#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "rearropt/rearrange.hpp"

using namespace rearropt;

TEST_CASE("class construction and membership") {
  Field g(6);
  g << 1.0, 0.0, 0.5, 1.0, 0.0, 0.5;
  RearrangementClass cls = RearrangementClass::from_generator(g);
  REQUIRE(cls.bound == 1.0);
  REQUIRE(cls.membership(g));
  Field perm(6);
  perm << 0.0, 1.0, 1.0, 0.5, 0.5, 0.0;
  REQUIRE(cls.membership(perm));
  Field wrong(6);
  wrong << 1.0, 0.0, 0.5, 1.0, 0.0, 0.6;
  REQUIRE_FALSE(cls.membership(wrong));
  REQUIRE_THROWS_AS(RearrangementClass::from_generator(Field(Field::Zero(4))),
                    std::invalid_argument);
}

TEST_CASE("maximize_linear attains the enumerated maximum") {
  Field g(6);
  g << 1.0, 1.0, 0.5, 0.5, 0.0, 0.0;
  RearrangementClass cls = RearrangementClass::from_generator(g);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<Field> members = enumerate_class(cls);
  REQUIRE(members.size() == 90);  // 6! / (2! 2! 2!)
  for (int trial = 0; trial < 25; ++trial) {
    Field w(6);
    for (int i = 0; i < 6; ++i) w[i] = unif(rng);
    Field best = maximize_linear(cls, w);
    REQUIRE(cls.membership(best));
    double best_val = best.dot(w);
    for (const Field& m : members) REQUIRE(m.dot(w) <= best_val + 1e-12);
    // the optimizer output is comonotone with the profit field
    REQUIRE(is_comonotone(best, w, 1e-12));
  }
}

TEST_CASE("comonotonicity detects order violations") {
  Field g(4), w(4);
  g << 2.0, 1.0, 1.0, 0.0;
  w << 4.0, 3.0, 2.0, 1.0;
  REQUIRE(is_comonotone(g, w, 1e-12));
  g << 0.0, 1.0, 1.0, 2.0;
  REQUIRE_FALSE(is_comonotone(g, w, 1e-12));
}

TEST_CASE("enumeration caps out loudly") {
  Field g = ramp_generator(12, 0.1, 1.0);  // 12 distinct values: 12! members
  RearrangementClass cls = RearrangementClass::from_generator(g);
  REQUIRE_THROWS_AS(enumerate_class(cls), std::runtime_error);
}

TEST_CASE("mixtures stay in the closed convex hull") {
  Field g(4);
  g << 1.0, 1.0, 0.0, 0.0;
  RearrangementClass cls = RearrangementClass::from_generator(g);
  std::vector<Field> members = enumerate_class(cls);
  REQUIRE(members.size() == 6);
  ClosureElement mix = mixture(cls, {members[0], members[1]}, {0.25, 0.75});
  REQUIRE(mix.values.sum() == Catch::Approx(g.sum()));
  REQUIRE_FALSE(mix.in_class);
  ClosureElement trivial = mixture(cls, {members[2]}, {1.0});
  REQUIRE(trivial.in_class);
  REQUIRE_THROWS_AS(mixture(cls, {members[0]}, {0.5}), std::invalid_argument);
}

TEST_CASE("generators") {
  Field b = binary_generator(8, 0.25, 3.0);
  REQUIRE(b.sum() == Catch::Approx(6.0));
  REQUIRE(b[0] == 3.0);
  REQUIRE(b[2] == 0.0);
  Field r = ramp_generator(5, 1.0, 2.0);
  REQUIRE(r[0] == 1.0);
  REQUIRE(r[4] == 2.0);
  REQUIRE(r[2] == Catch::Approx(1.5));
}
