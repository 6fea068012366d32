// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "plap/config.hpp"
#include "plap/singular.hpp"
#include "plap/sweep.hpp"

using namespace plap;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double max_drift(const std::vector<double>& xs) {
  double d = 0;
  for (std::size_t l = 1; l < xs.size(); ++l) d = std::max(d, std::abs(xs[l] - xs[l - 1]) / std::max(xs[l], xs[l - 1]));
  return d;
}

Outcome closed_form_solves() {
  auto t0 = std::chrono::steady_clock::now();
  auto m = build_interval_mesh(0, 1, 256);
  auto w = constant_weight(m);
  auto s2 = solve(w, OperatorA(2), MeasureData::lebesgue(m));
  double err = 0;
  for (std::size_t i = 0; i < m->num_nodes(); ++i) {
    const double x = m->node(i).x;
    err = std::max(err, std::abs(s2.u[i] - x * (1 - x) / 2));
  }
  const double t2 = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  auto m3 = build_interval_mesh(0, 1, 512);
  auto s3 = solve(constant_weight(m3), OperatorA(3), MeasureData::lebesgue(m3));
  const double t3 = seconds_since(t0);
  const double sup3 = s3.u.sup_norm();
  const bool pass = s2.report.converged && s3.report.converged && err <= 1e-4 && std::abs(sup3 - 0.23570) <= 1e-3 &&
                    t2 < 5 && t3 < 5;
  return {pass, "p=2 max error " + fmt("%.2e", err) + ", p=3 max u " + fmt("%.5f", sup3) + " (expected 0.23570), " +
                    fmt("%.2fs", t2 + t3)};
}

Outcome tight_energy_sandwich() {
  auto m = build_interval_mesh(0, 1, 256);
  auto r = verify_energy_sandwich(constant_weight(m), OperatorA(2), MeasureData::lebesgue(m), 1.0, 0.02);
  const double c = 1 / std::sqrt(12.0);
  const bool close = std::abs(r.C_hat - c) <= 0.02 * c && std::abs(r.E - c) <= 0.02 * c && std::abs(r.M - c) <= 0.02 * c;
  return {close && r.passed, "C_hat " + fmt("%.6f", r.C_hat) + ", |grad u| " + fmt("%.6f", r.E) + ", (int u)^1/2 " +
                                 fmt("%.6f", r.M) + ", target " + fmt("%.6f", c)};
}

Outcome strict_energy_sandwich() {
  auto m = build_interval_mesh(0, 1, 256);
  auto r = verify_energy_sandwich(constant_weight(m), OperatorA(2), MeasureData::lebesgue(m), 0.5, 0.05);
  // upper_E = (1/q)((p-1)/(p-q))^{p-1} α^{-1} (C+)^q with α = 1
  const double factor = r.upper_E / std::pow(r.C_plus, r.q);
  const bool pass = r.passed && std::abs(factor - 4.0 / 3.0) <= 1e-12;
  return {pass, "E " + fmt("%.4f", r.E) + " in [" + fmt("%.4f", r.lower_E) + ", " + fmt("%.4f", r.upper_E) + "], M " +
                    fmt("%.4f", r.M) + " in [" + fmt("%.4f", r.lower_M) + ", " + fmt("%.4f", r.upper_M) +
                    "], factor " + fmt("%.6f", factor)};
}

Outcome wolff_oracle() {
  auto m = build_interval_mesh(-2, 2, 4096);
  auto w = constant_weight(m);
  auto atom = MeasureData::atom(m, {0.0, 0});
  double worst = 0;
  for (double R : {0.5, 1.0, 1.5})
    for (double x : {-0.3, 0.0, 0.1, 0.25}) {
      if (std::abs(x) >= R) continue;
      const double expected = (R - std::abs(x)) / 2;
      worst = std::max(worst, std::abs(wolff_potential(atom, w, {x, 0}, R, 2) - expected) / expected);
    }
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> U(0, 1);
  auto mc = build_interval_mesh(0, 1, 256);
  auto wc = power_weight(mc, 0.3);
  int bad = 0;
  for (int trial = 0; trial < 20; ++trial) {
    MeasureData mu = MeasureData::lebesgue(mc).scaled(U(rng)).plus(MeasureData::atom(mc, {0.2 + 0.6 * U(rng), 0}, U(rng)));
    MeasureData nu = mu.plus(MeasureData::atom(mc, {0.2 + 0.6 * U(rng), 0}, U(rng)))
                         .plus(MeasureData::power_density(mc, 0.5).scaled(U(rng)));
    const Point x{0.3 + 0.4 * U(rng), 0};
    const double R1 = 0.05 + 0.2 * U(rng), R2 = R1 + 0.1 * U(rng);
    const double p = 1.5 + 1.5 * U(rng);
    if (wolff_potential(mu, wc, x, R1, p) > wolff_potential(mu, wc, x, R2, p)) ++bad;
    if (wolff_potential(mu, wc, x, R2, p) > wolff_potential(nu, wc, x, R2, p)) ++bad;
  }
  return {worst <= 0.02 && bad == 0,
          "atom max relative error " + fmt("%.2e", worst) + ", monotonicity violations " + std::to_string(bad) + "/40"};
}

Outcome capacity_oracle() {
  auto m = build_interval_mesh(0, 1, 512);
  std::vector<char> K(m->num_nodes(), 0);
  for (std::size_t i = 0; i < K.size(); ++i) K[i] = m->node(i).x >= 0.25 - 1e-12 && m->node(i).x <= 0.75 + 1e-12;
  const double c2 = capacity(constant_weight(m), 2, K).cap;
  const double c3 = capacity(constant_weight(m), 3, K).cap;
  return {std::abs(c2 - 8) <= 0.08 && std::abs(c3 - 32) <= 0.32,
          "cap " + fmt("%.6f", c2) + " (p=2, expected 8), " + fmt("%.6f", c3) + " (p=3, expected 32)"};
}

Outcome admissibility_dichotomy() {
  std::vector<double> C;
  Verdict v1 = Verdict::undecided;
  for (int n : {128, 256, 512, 1024}) {
    auto m = build_interval_mesh(0, 1, n);
    auto w = constant_weight(m);
    auto sigma = MeasureData::power_density(m, 1.0);
    if (n == 256) v1 = wa_potential(w, OperatorA(2), sigma).verdict;
    C.push_back(estimate_trace_constant(w, sigma, 2, 1).C_hat);
  }
  auto m = build_interval_mesh(0, 1, 1024);
  auto p2 = wa_potential(constant_weight(m), OperatorA(2), MeasureData::power_density(m, 2.0));
  const double drift = max_drift(C);
  const bool pass = v1 == Verdict::converged && drift <= 0.05 && p2.verdict == Verdict::diverging &&
                    p2.stages.size() <= 12;
  return {pass, "s=1: potential " + to_string(v1) + ", C_hat " + fmt("%.5f", C.back()) + " drift " +
                    fmt("%.2e", drift) + "; s=2: potential " + to_string(p2.verdict) + " after " +
                    std::to_string(p2.stages.size()) + " stages"};
}

Outcome hardy() {
  auto m = build_interval_mesh(0, 1, 1024);
  auto r = hardy_check(constant_weight(m), 2);
  const bool pass = r.has_oracle && std::abs(r.constant - r.oracle) <= 0.05 * r.oracle;
  return {pass, "Rayleigh " + fmt("%.6f", r.constant) + ", dense eigenvalue " + fmt("%.6f", r.oracle) +
                    " (continuum value 4 is approached slowly)"};
}

Outcome singular_identity() {
  auto m = build_interval_mesh(0, 1, 4096);
  auto w = constant_weight(m);
  auto leb = MeasureData::lebesgue(m);
  SingularOptions o;
  o.k_max = 40;
  auto nl = SingularNonlinearity::power_decreasing(1);
  auto sol = solve_singular(w, OperatorA(2), leb, nl, o);
  const double energy = weighted_p_energy(sol.u, w, 2);
  double margin = INFINITY;
  for (const auto& st : sol.report.stages) margin = std::min(margin, st.barrier_margin);
  // same instance with the shift 1/k, for the record
  SingularOptions oh = o;
  oh.shift_kind = SingularOptions::Shift::harmonic;
  const double energy_h = weighted_p_energy(solve_singular(w, OperatorA(2), leb, nl, oh).u, w, 2);
  const bool pass = sol.report.verdict == Verdict::converged && std::abs(energy - 1) <= 1e-3 && margin >= -1e-6 &&
                    sol.report.monotonicity_violations == 0;
  return {pass, "energy " + fmt("%.6f", energy) + " (shift 1/k: " + fmt("%.6f", energy_h) + "), barrier margin " +
                    fmt("%.2e", margin) + ", monotonicity violations " +
                    std::to_string(sol.report.monotonicity_violations)};
}

Outcome solvability_both_directions() {
  std::vector<MeshPtr> lv{build_interval_mesh(0, 1, 64), build_interval_mesh(0, 1, 128), build_interval_mesh(0, 1, 256)};
  MeasureSpec leb;
  leb.kind = MeasureSpec::Kind::lebesgue;
  SingularOptions o;
  o.k_max = 40;
  auto r = verify_solvability_equivalence(lv, 0.0, OperatorA(2), leb, 0.5, o);
  const auto& last = r.levels.back();
  return {r.passed && r.forward_ok && r.reverse_ok && r.finding == "equivalence holds",
          r.finding + ": |grad u| " + fmt("%.6f", last.grad_norm) + " <= " + fmt("%.6f", r.forward_bound) +
              ", C_hat " + fmt("%.6f", last.C_hat) + " <= " + fmt("%.6f", r.reverse_bound)};
}

Outcome property_suites() {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> U(0, 1);
  std::ostringstream detail;
  bool pass = true;

  // comparison principle
  int cmp_bad = 0;
  auto m = build_interval_mesh(0, 1, 64);
  for (int trial = 0; trial < 50; ++trial) {
    const double p = 1.5 + 1.5 * U(rng);
    auto w = power_weight(m, (p - 1) * 0.5 * U(rng));
    std::vector<double> a(m->num_nodes()), b(m->num_nodes());
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = m->is_boundary(i) ? 0.0 : 0.02 * U(rng);
      b[i] = a[i] + (m->is_boundary(i) ? 0.0 : 0.02 * U(rng));
    }
    MeasureData mu(m, a), nu(m, b);
    if (trial % 5 == 0) nu = nu.plus(MeasureData::atom(m, {U(rng), 0}, U(rng)));
    try {
      if (!comparison_check(w, OperatorA(p), mu, nu).holds) ++cmp_bad;
    } catch (const Error&) {
      ++cmp_bad;
    }
  }
  pass = pass && cmp_bad == 0;
  detail << "comparison " << 50 - cmp_bad << "/50";

  // homogeneity t^{p-1} μ -> t u
  double hom = 0;
  for (double p : {1.7, 2.0, 3.0}) {
    auto w = power_weight(m, 0.3);
    auto mu = MeasureData::power_density(m, 0.5);
    const double t = 0.5 + 3 * U(rng);
    auto u1 = solve(w, OperatorA(p), mu).u;
    auto ut = solve(w, OperatorA(p), mu.scaled(std::pow(t, p - 1))).u;
    for (std::size_t i = 0; i < u1.size(); ++i) hom = std::max(hom, std::abs(ut[i] - t * u1[i]) / (1 + ut.sup_norm()));
  }
  pass = pass && hom <= 1e-6;
  detail << ", homogeneity " << fmt("%.1e", hom);

  // weak <= strong
  int weak_bad = 0;
  auto sigma = MeasureData::power_density(m, 0.7).plus(MeasureData::atom(m, {0.4, 0}, 0.3));
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> f(m->num_nodes());
    for (double& x : f) x = (U(rng) - 0.3) * std::exp(4 * U(rng));
    DiscreteFunction g(m, f, false);
    const double q = 0.3 + 3 * U(rng);
    if (weak_lq_norm(g, sigma, q) > lq_norm(g, sigma, q) * (1 + 1e-12)) ++weak_bad;
  }
  pass = pass && weak_bad == 0;
  detail << ", weak<=strong " << 100 - weak_bad << "/100";

  // exhaustion-schedule invariance
  {
    auto mm = build_interval_mesh(0, 1, 128);
    auto w = power_weight(mm, 0.5);
    auto s = MeasureData::power_density(mm, 1.2);
    ExhaustionSchedule s2, s3;
    s3.ratio = 3;
    s2.k_max = s3.k_max = 30;
    auto a = wa_potential(w, OperatorA(2.5), s, s2);
    auto b = wa_potential(w, OperatorA(2.5), s, s3);
    double d = 0;
    for (std::size_t i = 0; i < a.u.size(); ++i) d = std::max(d, std::abs(a.u[i] - b.u[i]));
    const double tol = a.last_report.tolerance;
    pass = pass && a.verdict == Verdict::converged && b.verdict == Verdict::converged && d <= 5 * tol;
    detail << ", schedules differ by " << fmt("%.1e", d) << " (5 tol = " << fmt("%.1e", 5 * tol) << ")";
  }

  // determinism
  {
    auto cfg = ScenarioConfig::from_ini(IniFile::parse("[domain]\ncells = 64\n[sweep]\nt = 0, 0.5\ns = 1, 1.5\nq = 0.5, 1.5\n"));
    std::ostringstream a, b;
    write_sweep_csv(a, run_sweep(cfg, 2, 1));
    write_sweep_csv(b, run_sweep(cfg, 2, 4));
    auto w = power_weight(m, 0.2);
    auto u1 = solve(w, OperatorA(2.5), MeasureData::lebesgue(m)).u;
    auto u2 = solve(w, OperatorA(2.5), MeasureData::lebesgue(m)).u;
    const bool same = a.str() == b.str() && u1.values() == u2.values();
    pass = pass && same;
    detail << ", reruns " << (same ? "identical" : "differ");
  }
  return {pass, detail.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"closed-form solves", closed_form_solves},
      {"energy sandwich, tight case", tight_energy_sandwich},
      {"energy sandwich, strict case", strict_energy_sandwich},
      {"Wolff potential oracle and monotonicity", wolff_oracle},
      {"condenser capacity oracle", capacity_oracle},
      {"admissible versus divergent density", admissibility_dichotomy},
      {"Hardy constant", hardy},
      {"singular identity and barrier", singular_identity},
      {"finite energy solution versus trace inequality", solvability_both_directions},
      {"property suites", property_suites}};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %2zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failures ? 1 : 0;
}
