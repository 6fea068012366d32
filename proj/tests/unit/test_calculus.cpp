#include <cmath>
#include <random>

#include "doctest.h"
#include "plap/calculus.hpp"

using namespace plap;

TEST_CASE("weighted p energy") {
  auto m = build_interval_mesh(0, 1, 64);
  auto w = constant_weight(m);
  auto lin = DiscreteFunction::interpolate(m, [](Point x) { return x.x; }, false);
  CHECK(weighted_p_energy(lin, w, 2.0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(weighted_p_energy(DiscreteFunction::zeros(m), w, 2.0) == 0.0);

  auto fine = build_interval_mesh(0, 1, 512);
  auto bump = DiscreteFunction::interpolate(fine, [](Point x) { return x.x * (1 - x.x); }, true);
  const double h = 1.0 / 512;
  CHECK(std::abs(weighted_p_energy(bump, constant_weight(fine), 2.0) - 1.0 / 3.0) <= h * h);
  CHECK_THROWS_AS(weighted_p_energy(lin, constant_weight(fine), 2.0), Error);
}

TEST_CASE("energy homogeneity") {
  auto m = build_polygon_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, 0.1);
  auto f = DiscreteFunction::interpolate(m, [](Point x) { return std::sin(3 * x.x) * x.y; }, false);
  auto w = power_weight(m, 0.5);
  const double c = -2.5;
  std::vector<double> v = f.values();
  for (double& x : v) x *= c;
  DiscreteFunction g(m, v, false);
  for (double p : {1.5, 2.0, 3.0})
    CHECK(weighted_p_energy(g, w, p) == doctest::Approx(std::pow(std::abs(c), p) * weighted_p_energy(f, w, p)).epsilon(1e-12));
}

TEST_CASE("measure pairing") {
  auto m = build_interval_mesh(0, 1, 256);
  auto leb = MeasureData::lebesgue(m);
  auto one = DiscreteFunction::interpolate(m, [](Point) { return 1.0; }, false);
  CHECK(std::abs(measure_pairing(one, leb) - 1.0) <= 1e-12);
  auto lin = DiscreteFunction::interpolate(m, [](Point x) { return x.x; }, false);
  CHECK(measure_pairing(lin, MeasureData::atom(m, {0.5, 0})) == doctest::Approx(0.5));
  auto q = DiscreteFunction::interpolate(m, [](Point x) { return x.x * (1 - x.x) / 2; }, true);
  const double h = 1.0 / 256;
  CHECK(std::abs(measure_pairing(q, leb) - 1.0 / 12) <= h * h);
  CHECK_THROWS_AS(MeasureData::atom(m, {1.5, 0}), Error);
}

TEST_CASE("monotone pairing on random data") {
  auto m = build_interval_mesh(0, 1, 40);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> mass(m->num_nodes()), f(m->num_nodes()), g(m->num_nodes());
    for (std::size_t i = 0; i < mass.size(); ++i) {
      mass[i] = U(rng);
      f[i] = U(rng) - 0.5;
      g[i] = f[i] + U(rng);
    }
    MeasureData s(m, mass, {{{U(rng), 0}, U(rng)}});
    CHECK(measure_pairing(DiscreteFunction(m, f, false), s) <= measure_pairing(DiscreteFunction(m, g, false), s));
  }
}

TEST_CASE("Lq norms") {
  auto m = build_interval_mesh(0, 1, 512);
  auto leb = MeasureData::lebesgue(m);
  const double h = 1.0 / 512;
  auto lin = DiscreteFunction::interpolate(m, [](Point x) { return x.x; }, false);
  CHECK(std::abs(lq_norm(lin, leb, 1.0) - 0.5) <= h * h);
  CHECK(std::abs(lq_norm(lin, leb, 2.0) - 1.0 / std::sqrt(3.0)) <= h * h);
  auto c = DiscreteFunction::interpolate(m, [](Point) { return 3.0; }, false);
  auto half = MeasureData::lebesgue(m, 0.5);
  CHECK(lq_norm(c, half, 0.5) == doctest::Approx(3.0 * 0.25));
  CHECK_THROWS_AS(lq_norm(c, half, 0.0), Error);
}

TEST_CASE("weak Lq norm") {
  auto m = build_interval_mesh(0, 1, 512);
  auto leb = MeasureData::lebesgue(m);
  auto lin = DiscreteFunction::interpolate(m, [](Point x) { return x.x; }, false);
  CHECK(std::abs(weak_lq_norm(lin, leb, 1.0) - 0.25) <= 2.0 / 512);
  auto c = DiscreteFunction::interpolate(m, [](Point) { return 2.0; }, false);
  CHECK(weak_lq_norm(c, leb, 2.0) == doctest::Approx(2.0));
  auto atom = MeasureData::atom(m, {0.3, 0}, 0.7);
  CHECK(weak_lq_norm(lin, atom, 1.5) == doctest::Approx(lq_norm(lin, atom, 1.5)));
}

TEST_CASE("weak norm never exceeds strong norm") {
  auto m = build_interval_mesh(0, 1, 60);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> U(0, 1);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> mass(m->num_nodes()), f(m->num_nodes());
    for (std::size_t i = 0; i < mass.size(); ++i) {
      mass[i] = U(rng) / 60;
      f[i] = 4 * U(rng) - 2;
    }
    MeasureData s(m, mass);
    DiscreteFunction fn(m, f, false);
    for (double q : {0.5, 1.0, 1.5, 2.0}) CHECK(weak_lq_norm(fn, s, q) <= lq_norm(fn, s, q) * (1 + 1e-12));
  }
}

TEST_CASE("lq norm converges under refinement") {
  double prev = 1.0;
  for (int n : {16, 32, 64, 128}) {
    auto m = build_interval_mesh(0, 1, n);
    auto f = DiscreteFunction::interpolate(m, [](Point x) { return std::sin(M_PI * x.x); }, true);
    const double err = std::abs(lq_norm(f, MeasureData::lebesgue(m), 2.0) - std::sqrt(0.5));
    CHECK(err <= prev);
    CHECK(err <= 2.0 / n);
    prev = err;
  }
}

TEST_CASE("measure truncation and power densities") {
  auto m = build_interval_mesh(0, 1, 64);
  auto s = MeasureData::power_density(m, 2.0);
  CHECK(s.infinite_total());
  CHECK_FALSE(MeasureData::power_density(m, 0.5).infinite_total());
  auto t1 = s.truncated(0.25), t2 = s.truncated(0.125);
  CHECK_FALSE(t1.infinite_total());
  CHECK(t1.le(t2));
  CHECK(t2.le(s));
  CHECK(t1.total_mass() < t2.total_mass());
  // boundary nodes are never in the truncation; their mass is inert in solves
  const double interior = s.mass_where([&](std::size_t i) { return !m->is_boundary(i); }, [](const Atom&) { return true; });
  CHECK(s.truncated(0.0).total_mass() == doctest::Approx(interior));
}

TEST_CASE("discrete function invariants") {
  auto m = build_interval_mesh(0, 1, 4);
  CHECK_THROWS_AS(DiscreteFunction(m, {1, 0, 0, 0, 0}, true), Error);
  CHECK_THROWS_AS(DiscreteFunction(m, {0, NAN, 0, 0, 0}, false), Error);
  CHECK_THROWS_AS(DiscreteFunction(m, {0, 0, 0}, false), Error);
  auto f = DiscreteFunction::interpolate(m, [](Point x) { return x.x; }, true);
  CHECK(f[4] == 0.0);
  CHECK(f.value_at({0.375, 0}) == doctest::Approx(0.375));
}
