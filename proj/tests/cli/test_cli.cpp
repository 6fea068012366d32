#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

Run run(const std::string& sub, const fs::path& config, const fs::path& out, const std::string& extra = "") {
  fs::create_directories(out);
  const fs::path log = out / "stdout.txt";
  const std::string cmd = std::string(PLAP_CLI) + " " + sub + " --config " + config.string() + " --out " +
                          out.string() + " " + extra + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
}

fs::path cfg(const std::string& name) { return fs::path(PLAP_CONFIGS) / name; }
fs::path scratch(const std::string& name) { return fs::path(PLAP_SCRATCH) / name; }

fs::path write_config(const std::string& name, const std::string& text) {
  fs::create_directories(PLAP_SCRATCH);
  const fs::path p = scratch(name);
  std::ofstream(p) << text;
  return p;
}

double value_at(const std::string& csv, double x) {
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string node, xs, v;
    std::getline(ls, node, ',');
    std::getline(ls, xs, ',');
    std::getline(ls, v, ',');
    if (std::abs(std::stod(xs) - x) < 1e-12) return std::stod(v);
  }
  return NAN;
}

}  // namespace

TEST_CASE("solve writes the closed-form solution") {
  auto r = run("solve", cfg("solve_interval.ini"), scratch("solve"), "--plot");
  CHECK(r.code == 0);
  CHECK(r.out.find("status converged") != std::string::npos);
  CHECK(std::abs(value_at(slurp(scratch("solve") / "solution.csv"), 0.5) - 0.125) <= 1e-4);
  CHECK(fs::exists(scratch("solve") / "solution.svg"));
  CHECK(slurp(scratch("solve") / "report.csv").rfind("status,iterations,", 0) == 0);
}

TEST_CASE("trace reports the constant") {
  auto r = run("trace", cfg("trace_interval.ini"), scratch("trace"));
  CHECK(r.code == 0);
  CHECK(r.out.find("C1_hat ≈ 0.2887") != std::string::npos);
}

TEST_CASE("validation errors exit with status 2") {
  auto bad = write_config("bad_q.ini", "[operator]\np = 2\n[problem]\nq = 2\n");
  auto r = run("solve", bad, scratch("bad"));
  CHECK(r.code == 2);
  CHECK(r.out.find("0 < q < p") != std::string::npos);
  CHECK(run("solve", scratch("missing.ini"), scratch("bad")).code == 2);
  CHECK(run("nonsense", cfg("solve_interval.ini"), scratch("bad")).code == 2);
}

TEST_CASE("other subcommands run") {
  auto c = run("capacity", cfg("capacity_interval.ini"), scratch("cap"));
  CHECK(c.code == 0);
  CHECK(c.out.find("cap 8") != std::string::npos);
  auto w = run("wolff", cfg("wolff_atom.ini"), scratch("wolff"));
  CHECK(w.code == 0);
  CHECK(w.out.find("PASS wolff_sandwich") != std::string::npos);
  auto s = run("singular", cfg("singular_interval.ini"), scratch("singular"));
  CHECK(s.code == 0);
  CHECK(s.out.find("verdict converged") != std::string::npos);
  auto p = run("potential", cfg("solve_interval.ini"), scratch("potential"), "--plot");
  CHECK(p.code == 0);
  CHECK(fs::exists(scratch("potential") / "stages.csv"));
  auto l = run("solve", cfg("lshape_solve.ini"), scratch("lshape"));
  CHECK(l.code == 0);
  auto v = run("verify", cfg("verify_sublinear.ini"), scratch("verify"));
  CHECK(v.code == 0);
  CHECK(v.out.find("FAIL") == std::string::npos);
  CHECK(v.out.find("PASS solvability: equivalence holds") != std::string::npos);
}

TEST_CASE("failing verification exits nonzero") {
  // the potential of dist^-2 diverges, so the energy sandwich cannot be checked
  auto c = write_config("fail.ini", "[domain]\ncells = 1024\n[measure]\nkind = power\ns = 2\n[problem]\nq = 0.5\n"
                                    "checks = energy_sandwich\n");
  auto r = run("verify", c, scratch("fail"));
  CHECK(r.code == 1);
  CHECK(r.out.find("FAIL energy_sandwich") != std::string::npos);
}

TEST_CASE("sweep classification and determinism") {
  auto a = run("sweep", cfg("sweep_admissible.ini"), scratch("sweep_a1"), "--plot");
  CHECK(a.code == 0);
  const std::string csv = slurp(scratch("sweep_a1") / "sweep.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);
  CHECK(fs::exists(scratch("sweep_a1") / "sweep.svg"));
  auto b = run("sweep", cfg("sweep_admissible.ini"), scratch("sweep_a2"), "--workers 1");
  CHECK(b.code == 0);
  CHECK(slurp(scratch("sweep_a2") / "sweep.csv") == csv);

  auto d = run("sweep", cfg("sweep_divergent.ini"), scratch("sweep_d"));
  CHECK(d.code == 0);
  CHECK(d.out.find("observed unstable potential diverging") != std::string::npos);
  CHECK(d.out.find("observed stable") == std::string::npos);

  auto e = run("sweep", cfg("sweep_empty.ini"), scratch("sweep_e"));
  CHECK(e.code == 0);
  const std::string ecsv = slurp(scratch("sweep_e") / "sweep.csv");
  CHECK(std::count(ecsv.begin(), ecsv.end(), '\n') == 1);
}

TEST_CASE("sweep exits nonzero on a failed row") {
  // with a drift tolerance of zero no refinement looks stable
  auto c = write_config("sweep_fail.ini", "[domain]\ncells = 16\n[sweep]\ns = 1.5\nq = 1.5\nlevels = 2\ndrift_tol = 0\n");
  auto r = run("sweep", c, scratch("sweep_fail"));
  CHECK(r.code == 1);
  CHECK(r.out.find("FAIL") != std::string::npos);
}
