#include <cmath>
#include <sstream>

#include "doctest.h"
#include "plap/mesh.hpp"

using namespace plap;

TEST_CASE("interval mesh nodes and distances") {
  auto m = build_interval_mesh(0.0, 1.0, 4);
  REQUIRE(m->num_nodes() == 5);
  const double xs[] = {0, .25, .5, .75, 1};
  const double ds[] = {0, .25, .5, .25, 0};
  for (int i = 0; i < 5; ++i) {
    CHECK(m->node(i).x == doctest::Approx(xs[i]));
    CHECK(m->delta(i) == doctest::Approx(ds[i]));
  }
  CHECK(m->is_boundary(0));
  CHECK(m->is_boundary(4));
  CHECK_FALSE(m->is_boundary(2));

  auto m2 = build_interval_mesh(0.0, 1.0, 2);
  CHECK(m2->delta(1) == 0.5);

  auto m3 = build_interval_mesh(-1.0, 1.0, 4);
  CHECK(m3->node(2).x == 0.0);
  CHECK(m3->delta(2) == 1.0);
}

TEST_CASE("interval mesh rejects bad input") {
  CHECK_THROWS_AS(build_interval_mesh(1.0, 0.0, 4), Error);
  CHECK_THROWS_AS(build_interval_mesh(0.0, 1.0, 1), Error);
}

TEST_CASE("unit square mesh") {
  auto m = build_polygon_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, 0.5);
  CHECK(m->num_nodes() == 9);
  CHECK(m->num_cells() == 8);
  CHECK(m->measure() == doctest::Approx(1.0).epsilon(1e-12));
  const auto c = m->nearest_node({0.5, 0.5});
  CHECK(m->delta(c) == doctest::Approx(0.5));
  for (std::size_t i = 0; i < m->num_nodes(); ++i) CHECK((m->delta(i) == 0.0) == m->is_boundary(i));
  for (std::size_t c2 = 0; c2 < m->num_cells(); ++c2) CHECK(m->volume(c2) > 0.0);
}

TEST_CASE("L-shape area matches the shoelace formula") {
  std::vector<Point> L = {{0, 0}, {1, 0}, {1, .5}, {.5, .5}, {.5, 1}, {0, 1}};
  double shoelace = 0.0;
  for (std::size_t i = 0; i < L.size(); ++i) {
    const Point a = L[i], b = L[(i + 1) % L.size()];
    shoelace += a.x * b.y - b.x * a.y;
  }
  shoelace *= 0.5;
  auto m = build_polygon_mesh(L, 0.25);
  CHECK(std::abs(m->measure() - shoelace) <= 1e-12);
  CHECK(shoelace == doctest::Approx(0.75));
  // re-entrant corner is a boundary node
  CHECK(m->is_boundary(m->nearest_node({.5, .5})));
  // distance near the re-entrant corner is the corner distance
  CHECK(m->geometry().distance_to_boundary({.4, .4}) == doctest::Approx(std::sqrt(0.02)));
}

TEST_CASE("polygon mesh errors") {
  CHECK_THROWS_AS(build_polygon_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, 2.0), Error);
  CHECK_THROWS_AS(build_polygon_mesh({{0, 0}, {1, 0}, {0, 1}}, 0.1), Error);
  CHECK_THROWS_AS(build_polygon_mesh({{0, 0}, {0, 1}, {1, 1}, {1, 0}}, 0.1), Error);  // clockwise
  CHECK_THROWS_AS(build_polygon_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, 0.0), Error);
}

TEST_CASE("refinement keeps distances at persistent nodes") {
  auto coarse = build_polygon_mesh({{0, 0}, {2, 0}, {2, 1}, {0, 1}}, 0.25);
  auto fine = build_polygon_mesh({{0, 0}, {2, 0}, {2, 1}, {0, 1}}, 0.125);
  CHECK(fine->num_nodes() > coarse->num_nodes());
  for (std::size_t i = 0; i < coarse->num_nodes(); ++i) {
    const auto j = fine->nearest_node(coarse->node(i));
    CHECK(distance(fine->node(j), coarse->node(i)) < 1e-14);
    CHECK(fine->delta(j) == coarse->delta(i));
  }
  auto ci = build_interval_mesh(0, 1, 8), fi = build_interval_mesh(0, 1, 16);
  for (std::size_t i = 0; i < ci->num_nodes(); ++i) CHECK(fi->delta(2 * i) == ci->delta(i));
}

TEST_CASE("volumes sum to the domain measure") {
  for (int n : {3, 17, 256}) {
    auto m = build_interval_mesh(-0.5, 2.0, n);
    CHECK(std::abs(m->measure() - 2.5) <= 1e-12 * 2.5);
  }
  auto m = build_polygon_mesh({{0, 0}, {3, 0}, {3, 1}, {0, 1}}, 0.3);
  CHECK(std::abs(m->measure() - 3.0) <= 1e-12 * 3.0);
}

TEST_CASE("power weight values") {
  auto m = build_interval_mesh(0.0, 1.0, 4);
  auto w0 = power_weight(m, 0.0);
  CHECK(w0.is_constant());
  for (std::size_t c = 0; c < m->num_cells(); ++c) CHECK(w0.cell_value(c) == 1.0);
  auto w1 = power_weight(m, 1.0);
  CHECK(w1.nodal(2) == doctest::Approx(0.5));
  CHECK(w1.at({0.5, 0}) == doctest::Approx(0.5));
  auto wm = power_weight(m, -0.5);
  CHECK(wm.nodal(1) == doctest::Approx(2.0));
  for (std::size_t c = 0; c < m->num_cells(); ++c) {
    CHECK(wm.cell_value(c) > 0.0);
    CHECK(std::isfinite(wm.cell_value(c)));
  }
}

TEST_CASE("mesh file round trip") {
  auto m = build_polygon_mesh({{0, 0}, {1, 0}, {1, .5}, {.5, .5}, {.5, 1}, {0, 1}}, 0.25);
  std::stringstream ss;
  m->write(ss);
  auto r = Mesh::read(ss);
  REQUIRE(r->num_nodes() == m->num_nodes());
  REQUIRE(r->num_cells() == m->num_cells());
  for (std::size_t i = 0; i < m->num_nodes(); ++i) {
    CHECK(r->node(i).x == m->node(i).x);
    CHECK(r->delta(i) == m->delta(i));
    CHECK(r->is_boundary(i) == m->is_boundary(i));
  }
  CHECK(r->measure() == doctest::Approx(m->measure()));
}
