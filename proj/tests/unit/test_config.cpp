#include <sstream>

#include "doctest.h"
#include "plap/config.hpp"
#include "plap/svg.hpp"
#include "plap/sweep.hpp"

using namespace plap;

namespace {

ScenarioConfig parse(const std::string& text) { return ScenarioConfig::from_ini(IniFile::parse(text)); }

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("ini parsing") {
  auto ini = IniFile::parse("# comment\n[a]\nx = 1.5  # trailing\n; another\ny=yes\nlist = 1, 2,3\nempty =\n");
  CHECK(ini.get_double("a", "x", 0) == 1.5);
  CHECK(ini.get_bool("a", "y", false));
  CHECK(ini.get_list("a", "list", {}) == std::vector<double>{1, 2, 3});
  CHECK(ini.get_list("a", "empty", {7}).empty());
  CHECK(ini.get_list("a", "missing", {7}) == std::vector<double>{7});
  CHECK(ini.unused().empty());
  CHECK_THROWS_AS(IniFile::parse("x = 1\n"), ConfigError);
  CHECK_THROWS_AS(IniFile::parse("[a]\nx = 1\nx = 2\n"), ConfigError);
  CHECK_THROWS_AS(IniFile::parse("[a\n"), ConfigError);
  CHECK_THROWS_AS(IniFile::parse("[a]\nnot a pair\n").get("a", "b", ""), ConfigError);
}

TEST_CASE("scenario defaults and fields") {
  auto c = parse("[domain]\ncells = 8\n[measure]\nkind = atoms\natoms = 0.25 1; 0.5 2\n[operator]\np = 3\n"
                 "[problem]\nkind = wolff\nradius = 0.1\npoints = 0.5; 0.75\n");
  CHECK(c.cells == 8);
  CHECK(c.p == 3);
  REQUIRE(c.measure.atoms.size() == 2);
  CHECK(c.measure.atoms[1].location.x == 0.5);
  CHECK(c.measure.atoms[1].mass == 2);
  CHECK(c.points.size() == 2);
  CHECK(c.mesh(2)->num_cells() == 32);
  CHECK(c.mesh_size(1) == doctest::Approx(1.0 / 16));
  auto l = parse("[domain]\nshape = lshape\nh = 0.25\n");
  CHECK(l.mesh()->dimension() == 2);
  CHECK(l.mesh()->locate({0.75, 0.75}) == std::nullopt);
}

TEST_CASE("validation names the violated constraint") {
  CHECK(error_of("[operator]\np = 2\n[problem]\nq = 2\n").find("0 < q < p") != std::string::npos);
  CHECK(error_of("[operator]\np = 2\n[weight]\nt = 1\n").find("-1 < t < p - 1") != std::string::npos);
  CHECK(error_of("[weight]\nt = -1\n").find("-1 < t < p - 1") != std::string::npos);
  CHECK(error_of("[measure]\nkind = power\ns = 0.5\n").find("1 <= s") != std::string::npos);
  CHECK(error_of("[problem]\nkind = singular\ngamma = 0\n").find("gamma > 0") != std::string::npos);
  CHECK(error_of("[problem]\nkind = singular\nnonlinearity = sublinear\nq = 1.5\n").find("0 < q < 1") !=
        std::string::npos);
  CHECK(error_of("[sweep]\nq = 0.5, 3\n").find("0 < q < p") != std::string::npos);
  CHECK(error_of("[domain]\ncolor = red\n").find("[domain] color") != std::string::npos);
  CHECK(error_of("[operator]\np = two\n").find("[operator] p") != std::string::npos);
  CHECK(error_of("[domain]\ncells = 1.5\n").find("integer") != std::string::npos);
  CHECK(error_of("[problem]\nkind = capacity\nset = 0.2\n").find("[problem] set") != std::string::npos);
  CHECK(error_of("").empty());
}

TEST_CASE("parallel_for visits every index once") {
  std::vector<int> hits(97, 0);
  parallel_for(97, 4, [&](int i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS(parallel_for(10, 3, [](int i) {
    if (i == 5) throw Error("boom");
  }));
}

TEST_CASE("sweep rows are ordered and independent of workers") {
  auto c = parse("[domain]\ncells = 32\n[sweep]\nt = 0, 0.5\ns = 1\nq = 0.5, 1.5\n");
  auto a = run_sweep(c, 2, 1);
  auto b = run_sweep(c, 2, 3);
  std::ostringstream sa, sb;
  write_sweep_csv(sa, a);
  write_sweep_csv(sb, b);
  CHECK(sa.str() == sb.str());
  REQUIRE(a.size() == 8);
  CHECK(a[0].t == 0);
  CHECK(a[0].q == 0.5);
  CHECK(a[1].level == 1);
  CHECK(a[2].q == 1.5);
  CHECK(a[4].t == 0.5);
  auto empty = parse("[sweep]\nq =\n");
  std::ostringstream se;
  write_sweep_csv(se, run_sweep(empty, 3, 2));
  const std::string text = se.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 1);
}

TEST_CASE("svg chart") {
  auto svg = line_chart_svg("t<1>", "x", "y", {{"a", {0, 1, 2}, {1, 10, 1000}}, {"b", {0, 1}, {2, NAN}}});
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("t&lt;1&gt;") != std::string::npos);
  CHECK(svg.find("(log)") != std::string::npos);
  CHECK(std::count(svg.begin(), svg.end(), '\n') > 10);
  CHECK(line_chart_svg("empty", "x", "y", {}).find("</svg>") != std::string::npos);
}
