// Command-line front end: every subcommand reads one scenario config and
// writes CSV (and optionally SVG) into the output directory.
//
// Exit status: 0 success, 1 a check failed or a solver did not converge,
// 2 bad usage or invalid configuration.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "plap/config.hpp"
#include "plap/csv.hpp"
#include "plap/sweep.hpp"
#include "plap/svg.hpp"

namespace fs = std::filesystem;
using namespace plap;

namespace {

struct Context {
  ScenarioConfig cfg;
  fs::path out;
  int refine = -1;  // -1: not given on the command line
  int workers = 0;
  bool plot = false;

  int level() const { return std::max(refine, 0); }
  int levels() const { return refine >= 0 ? refine + 1 : 1; }

  std::ofstream open(const std::string& name) const {
    std::ofstream f(out / name, std::ios::binary);
    if (!f) throw Error("cannot write " + (out / name).string());
    return f;
  }
  void svg(const std::string& name, const std::string& text) const {
    if (plot) write_text_file((out / name).string(), text);
  }
};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Series function_series(const DiscreteFunction& u, const std::string& label) {
  Series s{label, {}, {}};
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < u.size(); ++i) pts.push_back({u.mesh()->node(i).x, u[i]});
  std::sort(pts.begin(), pts.end());
  for (auto [x, y] : pts) {
    s.x.push_back(x);
    s.y.push_back(y);
  }
  return s;
}

void plot_function(const Context& ctx, const DiscreteFunction& u, const std::string& name, const std::string& title) {
  if (ctx.plot && u.mesh()->dimension() == 1) ctx.svg(name, line_chart_svg(title, "x", "u", {function_series(u, "u")}));
}

int cmd_solve(const Context& ctx) {
  const auto& c = ctx.cfg;
  const auto mesh = c.mesh(ctx.level());
  const Weight w = power_weight(mesh, c.t);
  const auto sol = solve(w, c.op(), c.measure.build(mesh), c.solver);
  auto f = ctx.open("solution.csv");
  write_function_csv(f, sol.u);
  auto r = ctx.open("report.csv");
  r << SolveReport::csv_header() << '\n' << sol.report.csv_row() << '\n';
  std::cout << "status " << sol.report.status() << "\nsup_u " << g6(sol.u.sup_norm()) << "\nenergy "
            << g6(sol.report.energy) << "\niterations " << sol.report.iterations << '\n';
  plot_function(ctx, sol.u, "solution.svg", "measure-data solution");
  return sol.report.converged ? 0 : 1;
}

int cmd_potential(const Context& ctx) {
  const auto& c = ctx.cfg;
  const auto mesh = c.mesh(ctx.level());
  const Weight w = power_weight(mesh, c.t);
  const auto pot = wa_potential(w, c.op(), c.measure.build(mesh), c.exhaustion, c.solver);
  auto s = ctx.open("stages.csv");
  write_stage_csv(s, pot.stages);
  auto f = ctx.open("potential.csv");
  write_function_csv(f, pot.u);
  std::cout << "verdict " << to_string(pot.verdict) << "\nstages " << pot.stages.size() << "\nsup_u "
            << g6(pot.u.sup_norm()) << "\nmonotonicity_violations " << pot.monotonicity_violations << '\n';
  if (ctx.plot) {
    Series sup{"sup u_k", {}, {}};
    for (const auto& st : pot.stages) {
      sup.x.push_back(st.k);
      sup.y.push_back(st.sup);
    }
    ctx.svg("stages.svg", line_chart_svg("exhaustion stages", "k", "sup u_k", {sup}));
  }
  plot_function(ctx, pot.u, "potential.svg", "potential");
  return pot.failed_stage == 0 ? 0 : 1;
}

int cmd_trace(const Context& ctx) {
  const auto& c = ctx.cfg;
  auto f = ctx.open("trace.csv");
  f << "level,h,p,q,weak,C_hat,restarts_used,iterations\n";
  Series ser{c.weak ? "C2_hat" : "C1_hat", {}, {}};
  std::optional<TraceEstimate> last;
  for (int l = 0; l < ctx.levels(); ++l) {
    const auto mesh = c.mesh(l);
    const Weight w = power_weight(mesh, c.t);
    const auto sigma = c.measure.build(mesh);
    auto e = c.weak ? estimate_weak_trace_constant(w, sigma, c.p, c.q, c.trace)
                    : estimate_trace_constant(w, sigma, c.p, c.q, c.trace);
    f << l << ',' << format_number(c.mesh_size(l)) << ',' << format_number(c.p) << ',' << format_number(c.q) << ','
      << (c.weak ? 1 : 0) << ',' << format_number(e.C_hat) << ',' << e.restarts_used << ',' << e.iterations << '\n';
    ser.x.push_back(l);
    ser.y.push_back(e.C_hat);
    last = std::move(e);
  }
  auto m = ctx.open("maximizer.csv");
  write_function_csv(m, last->maximizer);
  std::cout << (c.weak ? "C2_hat" : "C1_hat") << " ≈ " << fixed(last->C_hat, 4) << '\n';
  if (ser.y.size() > 1) {
    double drift = 0;
    for (std::size_t l = 1; l < ser.y.size(); ++l)
      drift = std::max(drift, std::abs(ser.y[l] - ser.y[l - 1]) / std::max(ser.y[l], ser.y[l - 1]));
    std::cout << "drift " << g6(drift) << (drift <= c.drift_tol ? " stable" : " unstable") << '\n';
  }
  ctx.svg("trace.svg", line_chart_svg("trace constant vs refinement", "level", "C_hat", {ser}));
  return 0;
}

std::vector<char> set_mask(const ScenarioConfig& c, const Mesh& m) {
  std::vector<char> K(m.num_nodes(), 0);
  const double e = 1e-12;
  for (std::size_t i = 0; i < K.size(); ++i) {
    const Point x = m.node(i);
    K[i] = m.dimension() == 1 ? x.x >= c.set[0] - e && x.x <= c.set[1] + e
                        : x.x >= c.set[0] - e && x.y >= c.set[1] - e && x.x <= c.set[2] + e && x.y <= c.set[3] + e;
  }
  return K;
}

int cmd_capacity(const Context& ctx) {
  const auto& c = ctx.cfg;
  if (c.set.size() != (c.shape == "interval" ? 2u : 4u))
    throw ConfigError("[problem] set: need 'a, b' in 1D or 'x0, y0, x1, y1' in 2D");
  auto f = ctx.open("capacity.csv");
  f << "level,h,nodes,cap,iterations,status\n";
  bool ok = true;
  std::optional<CapacityResult> last;
  for (int l = 0; l < ctx.levels(); ++l) {
    const auto mesh = c.mesh(l);
    const auto K = set_mask(c, *mesh);
    auto r = capacity(power_weight(mesh, c.t), c.p, K, c.solver);
    const int nodes = static_cast<int>(std::count(K.begin(), K.end(), 1));
    f << l << ',' << format_number(c.mesh_size(l)) << ',' << nodes << ',' << format_number(r.cap) << ','
      << r.report.iterations << ',' << r.report.status() << '\n';
    ok = ok && r.report.converged;
    last = std::move(r);
  }
  auto m = ctx.open("minimizer.csv");
  write_function_csv(m, last->minimizer);
  std::cout << "cap " << g6(last->cap) << "\nstatus " << last->report.status() << '\n';
  plot_function(ctx, last->minimizer, "capacity.svg", "capacity potential");
  return ok ? 0 : 1;
}

int cmd_wolff(const Context& ctx) {
  const auto& c = ctx.cfg;
  if (c.points.empty()) throw ConfigError("[problem] points: need at least one sample point");
  if (!(c.radius > 0)) throw ConfigError("[problem] radius: need R > 0");
  const auto mesh = c.mesh(ctx.level());
  const Weight w = power_weight(mesh, c.t);
  const auto sigma = c.measure.build(mesh);
  const auto pot = wa_potential(w, c.op(), sigma, c.exhaustion, c.solver);
  if (pot.verdict != Verdict::converged) {
    std::cout << "verdict " << to_string(pot.verdict) << "\nFAIL wolff_sandwich: the potential did not converge\n";
    return 1;
  }
  const auto rep = wolff_sandwich_check(pot.u, sigma, w, c.p, c.points, c.radius);
  auto f = ctx.open("wolff.csv");
  f << (mesh->dimension() == 1 ? "x" : "x,y") << ",u,wolff_R,wolff_2R,inf_u,lower_ratio,upper_ratio\n";
  for (const auto& s : rep.samples) {
    f << format_number(s.x.x) << ',';
    if (mesh->dimension() == 2) f << format_number(s.x.y) << ',';
    f << format_number(s.u) << ',' << format_number(s.wolff_R) << ',' << format_number(s.wolff_2R) << ','
      << format_number(s.inf_u) << ',' << format_number(s.lower_ratio) << ',' << format_number(s.upper_ratio) << '\n';
  }
  std::cout << (rep.passed ? "PASS" : "FAIL") << " wolff_sandwich C_required " << g6(rep.C_required) << " cap "
            << g6(rep.C_cap) << " samples " << rep.samples.size() << " skipped " << rep.skipped << '\n';
  return rep.passed ? 0 : 1;
}

void write_singular_stages(std::ostream& os, const SingularRunReport& r) {
  os << "k,eps,r,inner_iterations,inner_converged,inner_change,sup,energy,barrier_margin\n";
  for (const auto& s : r.stages)
    os << s.k << ',' << format_number(s.eps) << ',' << format_number(s.r) << ',' << s.inner_iterations << ','
       << (s.inner_converged ? 1 : 0) << ',' << format_number(s.inner_change) << ',' << format_number(s.sup) << ','
       << format_number(s.energy) << ',' << format_number(s.barrier_margin) << '\n';
}

int cmd_singular(const Context& ctx) {
  const auto& c = ctx.cfg;
  const auto mesh = c.mesh(ctx.level());
  const Weight w = power_weight(mesh, c.t);
  const auto nl = c.singular_nonlinearity();
  const auto sol = solve_singular(w, c.op(), c.measure.build(mesh), nl, c.singular);
  auto s = ctx.open("stages.csv");
  write_singular_stages(s, sol.report);
  auto f = ctx.open("singular.csv");
  write_function_csv(f, sol.u);
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& st : sol.report.stages) margin = std::min(margin, st.barrier_margin);
  std::cout << "nonlinearity " << nl.describe() << "\nverdict " << to_string(sol.report.verdict) << "\nstages "
            << sol.report.stages.size() << "\nomega " << g6(sol.report.omega) << "\nsup_u " << g6(sol.u.sup_norm())
            << "\nenergy " << g6(weighted_p_energy(sol.u, w, c.p)) << "\nbarrier_margin " << g6(margin)
            << "\nmonotonicity_violations " << sol.report.monotonicity_violations << '\n';
  plot_function(ctx, sol.u, "singular.svg", "singular solution");
  return sol.report.verdict == Verdict::undecided ? 1 : 0;
}

struct CheckResult {
  bool passed = false;
  double value = 0, lower = 0, upper = 0;
  std::string detail;
};

CheckResult run_check(const Context& ctx, const std::string& name) {
  const auto& c = ctx.cfg;
  const auto mesh = c.mesh(ctx.level());
  const Weight w = power_weight(mesh, c.t);
  const auto sigma = c.measure.build(mesh);
  const OperatorA A = c.op();
  CheckResult out;
  if (name == "energy_identity") {
    const auto sol = solve(w, A, sigma, c.solver);
    const auto e = energy_identity_check(sol.u, w, A, sigma);
    out.value = e.mid;
    out.lower = e.lhs;
    out.upper = e.rhs;
    out.passed = sol.report.converged && std::abs(e.mid - e.rhs) <= 1e-6 * (1 + std::abs(e.rhs)) &&
                 e.lhs <= e.mid * (1 + 1e-9) + 1e-300;
    out.detail = "flux " + g6(e.mid) + " pairing " + g6(e.rhs);
  } else if (name == "energy_sandwich") {
    const auto r = verify_energy_sandwich(w, A, sigma, c.q, c.slack, c.trace, c.exhaustion);
    out = {r.passed, r.E, r.lower_E, r.upper_E,
           "C_hat " + g6(r.C_hat) + " E " + g6(r.E) + " in [" + g6(r.lower_E) + ", " + g6(r.upper_E) + "] M " +
               g6(r.M) + " in [" + g6(r.lower_M) + ", " + g6(r.upper_M) + "]"};
  } else if (name == "weak_sandwich") {
    const auto r = verify_weak_sandwich(w, A, sigma, c.q, c.slack, c.trace, c.exhaustion);
    out = {r.passed, r.mid, r.lower, r.upper,
           "C2_hat " + g6(r.C_hat) + " norm " + g6(r.mid) + " in [" + g6(r.lower) + ", " + g6(r.upper) + "]"};
  } else if (name == "hardy") {
    const auto r = hardy_check(w, c.p, c.trace);
    out.value = r.constant;
    out.lower = out.upper = r.has_oracle ? r.oracle : r.constant;
    out.passed = !r.has_oracle || std::abs(r.constant - r.oracle) <= 0.05 * r.oracle;
    out.detail = "rayleigh " + g6(r.constant) + (r.has_oracle ? " oracle " + g6(r.oracle) : " no oracle");
  } else if (name == "solvability") {
    std::vector<MeshPtr> lv;
    for (int l = 0; l < std::max(ctx.levels(), 3); ++l) lv.push_back(c.mesh(l));
    const auto r = verify_solvability_equivalence(lv, c.t, A, c.measure, c.q, c.singular, c.trace, c.drift_tol);
    out = {r.passed, r.levels.back().grad_norm, r.reverse_bound, r.forward_bound,
           r.finding + " C_drift " + g6(r.C_drift) + " energy_drift " + g6(r.energy_drift)};
  } else if (name == "finite_mass") {
    const auto r = verify_finite_mass_window(w, A, sigma, c.gamma, c.singular, c.window_tol);
    out = {r.passed, r.ratio, r.lower, r.upper,
           "ratio " + g6(r.ratio) + " in [" + g6(r.lower) + ", " + g6(r.upper) + "]"};
  } else if (name == "potential_bounds") {
    const auto r = verify_potential_bounds(w, A, sigma, c.singular_nonlinearity(), c.singular);
    out = {r.passed, r.sup_u, r.margin_g, r.margin_v,
           "margins " + g6(r.margin_g) + " " + g6(r.margin_v) + " tol " + g6(r.tol)};
  } else {
    throw ConfigError("[problem] checks: unknown check '" + name +
                      "' (energy_identity, energy_sandwich, weak_sandwich, hardy, solvability, finite_mass, "
                      "potential_bounds)");
  }
  return out;
}

int cmd_verify(const Context& ctx) {
  const auto& c = ctx.cfg;
  std::vector<std::string> checks = c.checks;
  if (checks.empty()) {
    switch (c.problem) {
      case ProblemKind::measure_data: checks = {"energy_identity", "energy_sandwich", "weak_sandwich"}; break;
      case ProblemKind::trace: checks = {"energy_sandwich", "weak_sandwich"}; break;
      case ProblemKind::singular:
        checks = c.nonlinearity == "sublinear" ? std::vector<std::string>{"potential_bounds", "solvability"}
                                               : std::vector<std::string>{"potential_bounds", "finite_mass"};
        break;
      default: throw ConfigError("[problem] checks: no default checks for problem kind " + to_string(c.problem));
    }
  }
  auto f = ctx.open("verify.csv");
  f << "check,status,value,lower,upper\n";
  int failures = 0;
  for (const auto& name : checks) {
    CheckResult r;
    try {
      r = run_check(ctx, name);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      r.passed = false;
      r.detail = e.what();
    }
    failures += !r.passed;
    f << name << ',' << (r.passed ? "PASS" : "FAIL") << ',' << format_number(r.value) << ','
      << format_number(r.lower) << ',' << format_number(r.upper) << '\n';
    std::cout << (r.passed ? "PASS " : "FAIL ") << name << ": " << r.detail << '\n';
  }
  return failures ? 1 : 0;
}

int cmd_sweep(const Context& ctx) {
  const auto& c = ctx.cfg;
  const int levels = ctx.refine >= 0 ? ctx.refine + 1 : c.levels;
  const int workers = ctx.workers > 0 ? ctx.workers : c.workers;
  const auto rows = run_sweep(c, levels, workers);
  auto f = ctx.open("sweep.csv");
  write_sweep_csv(f, rows);
  int failures = 0;
  std::vector<Series> series;
  for (std::size_t g = 0; g < rows.size(); g += levels) {
    const auto& r = rows[g + levels - 1];
    std::ostringstream label;
    label << "p=" << r.p << " t=" << r.t << " s=" << r.s << " q=" << r.q;
    Series s{label.str(), {}, {}};
    std::string status = "PASS";
    for (int l = 0; l < levels; ++l) {
      s.x.push_back(l);
      s.y.push_back(rows[g + l].C_hat);
      if (rows[g + l].status != "PASS") status = rows[g + l].status;
    }
    failures += status != "PASS";
    series.push_back(std::move(s));
    std::cout << status << ' ' << label.str() << " C_hat " << g6(r.C_hat) << " drift " << g6(r.C_drift)
              << " predicted " << r.predicted << " observed " << r.observed << " potential " << r.potential;
    for (int l = 0; l < levels; ++l)
      if (!rows[g + l].message.empty()) std::cout << " (" << rows[g + l].message << ')';
    std::cout << '\n';
  }
  std::cout << "points " << rows.size() / std::max(levels, 1) << " failed " << failures << '\n';
  ctx.svg("sweep.svg", line_chart_svg("C_hat vs refinement level", "level", "C_hat", series));
  return failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"p-Laplace potential theory experiments"};
  std::string config, out;
  Context ctx;
  app.add_option("--config", config, "scenario config file")->required();
  app.add_option("--out", out, "output directory (default: [output] dir)");
  app.add_option("--refine", ctx.refine, "refinement levels beyond the base mesh")->check(CLI::NonNegativeNumber);
  app.add_option("--workers", ctx.workers, "sweep worker threads (default: [sweep] workers)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--plot", ctx.plot, "also write SVG charts");
  app.require_subcommand(1);
  std::map<std::string, int (*)(const Context&)> commands{
      {"solve", cmd_solve},       {"potential", cmd_potential}, {"trace", cmd_trace},   {"capacity", cmd_capacity},
      {"wolff", cmd_wolff},       {"singular", cmd_singular},   {"verify", cmd_verify}, {"sweep", cmd_sweep}};
  const std::map<std::string, std::string> help{
      {"solve", "measure-data solution and solver report"},
      {"potential", "exhaustion potential of the measure"},
      {"trace", "trace constant estimate per refinement level"},
      {"capacity", "condenser capacity of [problem] set"},
      {"wolff", "Wolff potential two-sided check at [problem] points"},
      {"singular", "singular problem with the configured nonlinearity"},
      {"verify", "run [problem] checks and print PASS/FAIL lines"},
      {"sweep", "admissibility sweep over the [sweep] grid"}};
  for (const auto& [name, fn] : commands) app.add_subcommand(name, help.at(name))->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    ctx.cfg = ScenarioConfig::load(config);
    if (ctx.plot) ctx.cfg.plot = true;
    ctx.plot = ctx.cfg.plot;
    ctx.out = out.empty() ? fs::path(ctx.cfg.out_dir) : fs::path(out);
    fs::create_directories(ctx.out);
    const auto* sub = app.get_subcommands().front();
    return commands.at(sub->get_name())(ctx);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
