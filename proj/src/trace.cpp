#include "plap/trace.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>

namespace plap {

double trace_quotient(const DiscreteFunction& f, const Weight& w, const MeasureData& sigma, double p, double q) {
  const double e = weighted_p_energy(f, w, p);
  if (e <= 0.0) return 0.0;
  return lq_norm(f, sigma, q) / std::pow(e, 1.0 / p);
}

double weak_trace_quotient(const DiscreteFunction& f, const Weight& w, const MeasureData& sigma, double p,
                           double q) {
  const double e = weighted_p_energy(f, w, p);
  if (e <= 0.0) return 0.0;
  return weak_lq_norm(f, sigma, q) / std::pow(e, 1.0 / p);
}

namespace {

void check_exponents(double p, double q, bool allow_q_eq_p) {
  if (!(p > 1.0)) throw Error("p must exceed 1");
  if (!(q > 0.0) || !(allow_q_eq_p ? q <= p : q < p)) throw Error("q must lie in (0, p)");
}

DiscreteFunction normalized(const MeshPtr& mesh, std::vector<double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (mesh->is_boundary(i) || !(v[i] > 0.0)) v[i] = 0.0;
    s = std::max(s, v[i]);
  }
  if (s > 0.0)
    for (double& x : v) x /= s;
  return DiscreteFunction(mesh, std::move(v), true);
}

std::vector<DiscreteFunction> default_seeds(const MeshPtr& mesh) {
  std::vector<DiscreteFunction> seeds;
  seeds.push_back(normalized(mesh, std::vector<double>(mesh->num_nodes(), 1.0)));
  for (double a : {0.25, 0.5, 1.0}) {
    std::vector<double> v(mesh->num_nodes());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::pow(mesh->delta(i), a);
    seeds.push_back(normalized(mesh, std::move(v)));
  }
  return seeds;
}

/// Nodal load of the measure f^{expo} σ (nodes and atoms with f > 0).
std::vector<double> weighted_load(const MeasureData& sigma, const DiscreteFunction& f, double expo) {
  const Mesh& m = *sigma.mesh();
  std::vector<double> b(m.num_nodes(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i)
    if (sigma.mass(i) > 0.0 && f[i] > 0.0) b[i] = sigma.mass(i) * std::pow(f[i], expo);
  for (const auto& a : sigma.atoms()) {
    const auto loc = m.locate(a.location);
    const double v = f.value_at(a.location);
    if (a.mass <= 0.0 || !(v > 0.0)) continue;
    const auto idx = m.cell(loc->cell);
    for (int k = 0; k < m.nodes_per_cell(); ++k) b[idx[k]] += a.mass * std::pow(v, expo) * loc->barycentric[k];
  }
  return b;
}

bool interior_load_vanishes(const MeasureData& sigma) {
  const auto b = sigma.load_vector();
  const Mesh& m = *sigma.mesh();
  for (std::size_t i = 0; i < b.size(); ++i)
    if (!m.is_boundary(i) && b[i] > 0.0) return false;
  return true;
}

TraceEstimate power_ascent(const Weight& w, const MeasureData& sigma, double p, double q, const TraceOptions& opts,
                           const DiscreteFunction* previous, bool allow_q_eq_p) {
  check_exponents(p, q, allow_q_eq_p);
  if (w.mesh().get() != sigma.mesh().get()) throw Error("trace estimate: mismatched mesh");
  const MeshPtr& mesh = w.mesh();
  auto seeds = default_seeds(mesh);
  TraceEstimate best{p, q, false, 0.0, seeds.front(), 0, 0};
  if (sigma.is_zero()) return best;
  if (interior_load_vanishes(sigma)) throw Error("trace estimate: all restarts degenerate (no mass in the interior)");
  if (previous) seeds.push_back(normalized(mesh, previous->values()));

  const OperatorA A(p);
  const double theta = q >= 1.0 ? 1.0 : (p - 1.0) / (p - 1.0 + 1.0 - q);
  const int n_seeds = std::min<int>(std::max(opts.restarts, 1), static_cast<int>(seeds.size()));
  best.C_hat = -1.0;
  for (int s = 0; s < n_seeds; ++s) {
    ++best.restarts_used;
    DiscreteFunction f = seeds[static_cast<std::size_t>(s)];
    double R = trace_quotient(f, w, sigma, p, q);
    if (R > best.C_hat) {
      best.C_hat = R;
      best.maximizer = f;
    }
    std::vector<double> g_prev;
    int stable = 0;
    for (int it = 0; it < opts.max_iter; ++it) {
      DirichletProblem prob{weighted_load(sigma, f, q - 1.0), {}, {}};
      auto sol = solve_dirichlet(w, A, prob, opts.solver, g_prev.empty() ? nullptr : &g_prev);
      ++best.iterations;
      if (sol.report.blow_up || sol.u.sup_norm() <= 0.0) break;
      g_prev = sol.u.values();
      std::vector<double> next(g_prev);
      if (theta < 1.0)
        for (std::size_t i = 0; i < next.size(); ++i)
          next[i] = (f[i] > 0.0 && next[i] > 0.0) ? std::pow(f[i], 1.0 - theta) * std::pow(next[i], theta) : 0.0;
      f = normalized(mesh, std::move(next));
      const double Rn = trace_quotient(f, w, sigma, p, q);
      if (Rn > best.C_hat) {
        best.C_hat = Rn;
        best.maximizer = f;
      }
      const double rel = std::abs(Rn - R) / std::max(Rn, 1e-300);
      R = Rn;
      stable = rel <= opts.rel_tol ? stable + 1 : 0;
      if (stable >= 2) break;
    }
  }
  best.C_hat = trace_quotient(best.maximizer, w, sigma, p, q);
  return best;
}

/// Positive nodal levels of f to scan, descending.
std::vector<double> scan_levels(const DiscreteFunction& f, int max_levels) {
  std::set<double, std::greater<>> distinct;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f[i] > 0.0) distinct.insert(f[i]);
  std::vector<double> all(distinct.begin(), distinct.end());
  if (static_cast<int>(all.size()) <= max_levels) return all;
  std::set<double, std::greater<>> picked;
  for (int k = 0; k < max_levels; ++k)
    picked.insert(all[static_cast<std::size_t>(k) * (all.size() - 1) / static_cast<std::size_t>(max_levels - 1)]);
  // dyadic levels relative to the maximum
  for (int j = 0; j < 64; ++j) {
    const double v = all.front() * std::pow(2.0, -j);
    const auto it = std::lower_bound(all.begin(), all.end(), v, std::greater<>());
    if (it == all.end()) break;
    picked.insert(it == all.begin() ? *it : *std::prev(it));
  }
  return {picked.begin(), picked.end()};
}

}  // namespace

TraceEstimate estimate_trace_constant(const Weight& w, const MeasureData& sigma, double p, double q,
                                      const TraceOptions& opts, const DiscreteFunction* previous) {
  return power_ascent(w, sigma, p, q, opts, previous, false);
}

TraceEstimate estimate_weak_trace_constant(const Weight& w, const MeasureData& sigma, double p, double q,
                                           const TraceOptions& opts, const DiscreteFunction* previous) {
  check_exponents(p, q, false);
  if (w.mesh().get() != sigma.mesh().get()) throw Error("weak trace estimate: mismatched mesh");
  const MeshPtr& mesh = w.mesh();
  auto base = default_seeds(mesh);
  TraceEstimate best{p, q, true, 0.0, base.front(), 0, 0};
  if (sigma.is_zero()) return best;
  if (interior_load_vanishes(sigma))
    throw Error("weak trace estimate: all restarts degenerate (no mass in the interior)");

  std::vector<DiscreteFunction> seeds;
  seeds.push_back(normalized(mesh, solve(w, OperatorA(p), sigma, opts.solver).u.values()));
  seeds.insert(seeds.end(), base.begin(), base.end());
  if (previous) seeds.push_back(normalized(mesh, previous->values()));

  const int n_seeds = std::min<int>(std::max(opts.restarts, 1), static_cast<int>(seeds.size()));
  best.C_hat = -1.0;
  for (int s = 0; s < n_seeds; ++s) {
    ++best.restarts_used;
    DiscreteFunction f = seeds[static_cast<std::size_t>(s)];
    double R = weak_trace_quotient(f, w, sigma, p, q);
    if (R > best.C_hat) {
      best.C_hat = R;
      best.maximizer = f;
    }
    for (int it = 0; it < opts.max_iter; ++it) {
      ++best.iterations;
      double best_val = R;
      std::optional<DiscreteFunction> improved;
      for (double v : scan_levels(f, opts.max_levels)) {
        std::vector<char> K(f.size(), 0);
        for (std::size_t i = 0; i < f.size(); ++i) K[i] = f[i] >= v;
        const double sk = measure_of_set(sigma, K);
        if (sk <= 0.0) continue;
        auto cr = capacity(w, p, K, opts.solver);
        if (cr.cap <= 0.0) continue;
        const double val = std::pow(sk, 1.0 / q) / std::pow(cr.cap, 1.0 / p);
        if (val > best_val * (1.0 + 1e-12)) {
          best_val = val;
          improved = std::move(cr.minimizer);
        }
      }
      if (!improved) break;
      f = std::move(*improved);
      R = weak_trace_quotient(f, w, sigma, p, q);
      if (R > best.C_hat) {
        best.C_hat = R;
        best.maximizer = f;
      }
    }
  }
  best.C_hat = weak_trace_quotient(best.maximizer, w, sigma, p, q);
  return best;
}

CapacityResult capacity(const Weight& w, double p, const std::vector<char>& K, const SolverOptions& opts) {
  const Mesh& m = *w.mesh();
  if (K.size() != m.num_nodes()) throw Error("capacity: mask size mismatch");
  bool any = false;
  for (std::size_t i = 0; i < K.size(); ++i) {
    if (!K[i]) continue;
    if (m.is_boundary(i)) throw Error("capacity: K touches the boundary");
    any = true;
  }
  if (!any) throw Error("capacity: K is empty");
  DirichletProblem prob{std::vector<double>(m.num_nodes(), 0.0), K, std::vector<double>(m.num_nodes(), 0.0)};
  for (std::size_t i = 0; i < K.size(); ++i)
    if (K[i]) prob.pinned_values[i] = 1.0;
  auto sol = solve_dirichlet(w, OperatorA(p), prob, opts);
  const double cap = weighted_p_energy(sol.u, w, p);
  return {K, cap, std::move(sol.u), sol.report};
}

double measure_of_set(const MeasureData& sigma, const std::vector<char>& K) {
  const Mesh& m = *sigma.mesh();
  if (K.size() != m.num_nodes()) throw Error("measure_of_set: mask size mismatch");
  return sigma.mass_where([&](std::size_t i) { return K[i] != 0; },
                          [&](const Atom& a) {
                            const auto loc = m.locate(a.location);
                            const auto idx = m.cell(loc->cell);
                            for (int k = 0; k < m.nodes_per_cell(); ++k)
                              if (loc->barycentric[k] > 0.0 && !K[idx[k]]) return false;
                            return true;
                          });
}

CapacitaryReport capacitary_condition_check(const Weight& w, const MeasureData& sigma, double p, double q, double C2,
                                            const DiscreteFunction& u, double C3, const SolverOptions& opts) {
  check_exponents(p, q, false);
  if (!(C2 >= 0.0)) throw Error("capacitary check: C2 must be >= 0");
  const double umax = u.sup_norm() > 0.0 ? *std::max_element(u.values().begin(), u.values().end()) : 0.0;
  if (!(umax > 0.0)) throw Error("capacitary check: empty family of level sets");
  int positive = 0;
  double umin_pos = umax;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i] > 0.0) {
      ++positive;
      umin_pos = std::min(umin_pos, u[i]);
    }

  CapacitaryReport rep;
  rep.C2 = C2;
  // E_j = {u > 2^j} is nonempty iff 2^j < max u.
  int j = static_cast<int>(std::ceil(std::log2(umax))) - 1;
  while (std::ldexp(1.0, j) >= umax) --j;
  std::vector<CapacitaryRow> rows;
  for (;; --j) {
    const double level = std::ldexp(1.0, j);
    std::vector<char> K(u.size(), 0);
    int count = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
      if (u[i] > level) {
        K[i] = 1;
        ++count;
      }
    CapacitaryRow row;
    row.j = j;
    row.level = level;
    row.nodes = count;
    row.sigma_K = measure_of_set(sigma, K);
    row.cap = capacity(w, p, K, opts).cap;
    rows.push_back(row);
    if (count == positive || level < umin_pos) break;
  }
  std::reverse(rows.begin(), rows.end());
  for (const auto& r : rows) {
    if (r.sigma_K > 0.0) {
      rep.C2_min = std::max(rep.C2_min, std::pow(r.sigma_K, 1.0 / q) / std::pow(r.cap, 1.0 / p));
      rep.C3_min = std::max(rep.C3_min, r.sigma_K / (std::pow(r.cap, q / p) + 1.0));
    }
  }
  rep.C3 = C3 < 0.0 ? rep.C3_min : C3;
  rep.passed = true;
  for (auto& r : rows) {
    r.residual_C2 = std::pow(C2, p) * r.cap - std::pow(r.sigma_K, p / q);
    r.residual_C3 = rep.C3 * (std::pow(r.cap, q / p) + 1.0) - r.sigma_K;
    const double scale2 = std::pow(C2, p) * r.cap + std::pow(r.sigma_K, p / q);
    if (r.residual_C2 < -1e-9 * scale2 || r.residual_C3 < -1e-9 * (r.sigma_K + 1e-300)) rep.passed = false;
  }
  rep.rows = std::move(rows);
  return rep;
}

double hardy_dense_oracle(const Weight& w) {
  const MeshPtr& mesh = w.mesh();
  const double t = w.exponent();
  const auto sigma = MeasureData::power_density(mesh, 2.0 - t);
  std::vector<int> idx(mesh->num_nodes(), -1);
  int n = 0;
  for (std::size_t i = 0; i < mesh->num_nodes(); ++i)
    if (!mesh->is_boundary(i)) idx[i] = n++;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n), M = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t c = 0; c < mesh->num_cells(); ++c) {
    const double vw = mesh->volume(c) * w.cell_value(c);
    const auto cell = mesh->cell(c);
    const auto& g = mesh->basis_gradients(c);
    for (int a = 0; a < mesh->nodes_per_cell(); ++a)
      for (int b = 0; b < mesh->nodes_per_cell(); ++b) {
        const int ia = idx[cell[a]], ib = idx[cell[b]];
        if (ia >= 0 && ib >= 0) K(ia, ib) += vw * dot(g[a], g[b]);
      }
  }
  for (std::size_t i = 0; i < mesh->num_nodes(); ++i)
    if (idx[i] >= 0) M(idx[i], idx[i]) = sigma.mass(i);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(M, K, Eigen::EigenvaluesOnly);
  if (ges.info() != Eigen::Success) throw Error("hardy oracle: eigensolver failed");
  return ges.eigenvalues().maxCoeff();
}

HardyResult hardy_check(const Weight& w, double p, const TraceOptions& opts, int dense_limit) {
  const double t = w.exponent();
  if (!(p > 1.0)) throw Error("hardy_check: p must exceed 1");
  if (!(t > -1.0 && t < p - 1.0))
    throw Error("hardy_check: t must lie in (-1, p - 1); the inequality fails for t >= p - 1");
  const auto sigma = MeasureData::power_density(w.mesh(), p - t);
  auto est = power_ascent(w, sigma, p, p, opts, nullptr, true);
  HardyResult res{p, t, std::pow(est.C_hat, p), est.maximizer, false, 0.0, est.iterations};
  std::size_t interior = 0;
  for (std::size_t i = 0; i < w.mesh()->num_nodes(); ++i) interior += !w.mesh()->is_boundary(i);
  if (p == 2.0 && static_cast<int>(interior) <= dense_limit) {
    res.has_oracle = true;
    res.oracle = hardy_dense_oracle(w);
  }
  return res;
}

namespace {

DiscreteFunction nodal_power(const DiscreteFunction& u, double a) {
  std::vector<double> v(u.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = u[i] > 0.0 ? std::pow(u[i], a) : 0.0;
  return DiscreteFunction(u.mesh(), std::move(v), true);
}

PotentialResult checked_potential(const Weight& w, const OperatorA& A, const MeasureData& sigma,
                                  const ExhaustionSchedule& sched, const SolverOptions& opts, const char* who) {
  auto pot = wa_potential(w, A, sigma, sched, opts);
  if (pot.verdict == Verdict::diverging) throw Error(std::string(who) + ": the potential of sigma diverges");
  return pot;
}

}  // namespace

EnergySandwichReport verify_energy_sandwich(const Weight& w, const OperatorA& A, const MeasureData& sigma, double q,
                                  double slack, const TraceOptions& opts, const ExhaustionSchedule& sched) {
  const double p = A.p();
  check_exponents(p, q, false);
  auto pot = checked_potential(w, A, sigma, sched, opts.solver, "verify_energy_sandwich");
  EnergySandwichReport r{.u = pot.u, .estimate = estimate_trace_constant(w, sigma, p, q, opts)};
  r.p = p;
  r.q = q;
  r.alpha = A.alpha();
  r.beta = A.beta();
  r.slack = slack;
  r.verdict = pot.verdict;
  r.C_hat = r.estimate.C_hat;

  const double a = (p - 1.0) / (p - q);
  const auto v = nodal_power(r.u, a);
  r.E = std::pow(weighted_p_energy(v, w, p), (p - q) / p);
  const double integral = std::pow(lq_norm(r.u, sigma, q * a), q * a);
  r.M = std::pow(integral, (p - q) / (q * p));

  const double al = r.alpha, be = r.beta;
  r.lower_E = std::pow(al / be, p) / al * std::pow(r.C_hat, q);
  r.lower_M = (al / be) * std::pow(al, -1.0 / p) * r.C_hat;
  r.C_plus = std::pow(be, p / q) * std::pow(al, (1.0 - p) / q) * std::pow(r.E, 1.0 / q);
  r.upper_E = (1.0 / q) * std::pow(a, p - 1.0) / al * std::pow(r.C_plus, q);
  r.upper_M = std::pow(q, -1.0 / p) * std::pow(a, (p - 1.0) / p) * std::pow(al, -1.0 / p) * r.C_plus;
  r.lower_ok = r.lower_E <= r.E * (1.0 + slack) && r.lower_M <= r.M * (1.0 + slack);
  r.upper_ok = r.E <= r.upper_E * (1.0 + slack) && r.M <= r.upper_M * (1.0 + slack);
  r.passed = r.lower_ok && r.upper_ok;
  return r;
}

WeakSandwichReport verify_weak_sandwich(const Weight& w, const OperatorA& A, const MeasureData& sigma, double q, double slack,
                              const TraceOptions& opts, const ExhaustionSchedule& sched) {
  const double p = A.p();
  check_exponents(p, q, false);
  auto pot = checked_potential(w, A, sigma, sched, opts.solver, "verify_weak_sandwich");
  WeakSandwichReport r{.u = pot.u, .estimate = estimate_weak_trace_constant(w, sigma, p, q, opts)};
  r.p = p;
  r.q = q;
  r.alpha = A.alpha();
  r.beta = A.beta();
  r.slack = slack;
  r.verdict = pot.verdict;
  r.C_hat = r.estimate.C_hat;

  const double expo = q * (p - 1.0) / (p - q);
  r.mid = std::pow(weak_lq_norm(r.u, sigma, expo), (p - 1.0) / p);
  const double al = r.alpha, be = r.beta;
  r.lower = (al / be) * std::pow(al, -1.0 / p) * r.C_hat;
  r.C_plus = be * std::pow(al, (1.0 - p) / p) * r.mid;
  r.upper = std::pow(4.0, (p - 1.0) / (p - q)) * std::pow(al, -1.0 / p) * r.C_plus;
  r.lower_ok = r.lower <= r.mid * (1.0 + slack);
  r.upper_ok = r.mid <= r.upper * (1.0 + slack);
  r.passed = r.lower_ok && r.upper_ok;
  return r;
}

}  // namespace plap
