#include "plap/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "plap/csv.hpp"

namespace plap {

double ExhaustionSchedule::radius(const Mesh& mesh, int k) const {
  const double base = r0 > 0.0 ? r0 : mesh.max_delta();
  return base * std::pow(ratio, -k);
}

void ExhaustionSchedule::validate() const {
  if (!(r0 >= 0.0)) throw Error("exhaustion: r0 must be >= 0");
  if (!(ratio > 1.0)) throw Error("exhaustion: ratio must exceed 1");
  if (k_max < 1) throw Error("exhaustion: k_max must be >= 1");
  if (!(density_cap0 >= 0.0)) throw Error("exhaustion: density cap must be >= 0");
  if (cauchy_stages < 1 || growth_stages < 1) throw Error("exhaustion: stage counts must be >= 1");
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::converged:
      return "converged";
    case Verdict::diverging:
      return "diverging";
    case Verdict::undecided:
      return "undecided";
  }
  return "undecided";
}

namespace {

StageRecord make_record(int k, double r, const MeasureData& sk, const Solution& sol) {
  return {k, r, sk.total_mass(), sol.u.sup_norm(), sol.report.energy, sol.report.residual,
          sol.report.iterations, sol.report.converged};
}

}  // namespace

PotentialResult wa_potential(const Weight& w, const OperatorA& A, const MeasureData& sigma,
                             const ExhaustionSchedule& sched, const SolverOptions& opts) {
  sched.validate();
  if (w.mesh().get() != sigma.mesh().get()) throw Error("wa_potential: mismatched mesh");
  const Mesh& mesh = *w.mesh();
  PotentialResult res{DiscreteFunction::zeros(w.mesh()), {}, Verdict::undecided, 0, false, 0, {}};

  if (!sigma.infinite_total()) {
    auto sol = solve(w, A, sigma, opts);
    res.stages.push_back(make_record(1, 0.0, sigma, sol));
    res.blow_up = sol.report.blow_up;
    if (res.blow_up)
      res.verdict = Verdict::diverging;
    else if (sol.report.converged)
      res.verdict = Verdict::converged;
    else
      res.failed_stage = 1;
    res.last_report = sol.report;
    res.u = std::move(sol.u);
    return res;
  }

  DiscreteFunction prev = DiscreteFunction::zeros(w.mesh());
  double prev_sup = 0.0;
  int cauchy_run = 0, growth_run = 0;
  for (int k = 1; k <= sched.k_max; ++k) {
    const double r = sched.radius(mesh, k);
    const double cap = sched.density_cap0 > 0.0 ? sched.density_cap0 * std::pow(sched.ratio, k) : 0.0;
    const MeasureData sk = sigma.truncated(r, cap);
    auto sol = solve(w, A, sk, opts, &prev);
    res.stages.push_back(make_record(k, r, sk, sol));
    res.last_report = sol.report;
    if (sol.report.blow_up) {
      res.blow_up = true;
      res.verdict = Verdict::diverging;
      res.u = std::move(sol.u);
      return res;
    }
    if (!sol.report.converged && res.failed_stage == 0) res.failed_stage = k;

    const double slack = 10.0 * sol.report.tolerance;
    double diff = 0.0;
    for (std::size_t i = 0; i < prev.size(); ++i) {
      if (sol.u[i] < prev[i] - slack) ++res.monotonicity_violations;
      diff = std::max(diff, std::abs(sol.u[i] - prev[i]));
    }
    const double sup = sol.u.sup_norm();
    res.u = std::move(sol.u);
    if (sup > opts.blow_up_threshold) {
      res.verdict = Verdict::diverging;
      return res;
    }
    if (k > 1) {
      cauchy_run = diff <= sched.cauchy_tol * (1.0 + sup) ? cauchy_run + 1 : 0;
      if (cauchy_run >= sched.cauchy_stages) {
        res.verdict = Verdict::converged;
        return res;
      }
      const bool grew = k > sched.k_min && prev_sup > 0.0 && sup >= (1.0 + sched.growth_factor) * prev_sup;
      growth_run = grew ? growth_run + 1 : 0;
      if (growth_run >= sched.growth_stages) {
        res.verdict = Verdict::diverging;
        return res;
      }
    }
    prev = res.u;
    prev_sup = sup;
  }
  return res;
}

void write_stage_csv(std::ostream& os, const std::vector<StageRecord>& stages) {
  os << "k,r,mass,sup,energy,residual,iterations,converged\n";
  for (const auto& s : stages)
    os << s.k << "," << format_number(s.r) << "," << format_number(s.mass) << "," << format_number(s.sup) << ","
       << format_number(s.energy) << "," << format_number(s.residual) << "," << s.iterations << ","
       << (s.converged ? 1 : 0) << "\n";
}

namespace {

/// Ball masses around a fixed center, from distance-sorted cumulative sums.
class BallMasses {
 public:
  BallMasses(const MeasureData& mu, const Weight& w, Point x) {
    const Mesh& m = *mu.mesh();
    std::vector<std::size_t> order(m.num_nodes());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> d(m.num_nodes());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = distance(m.node(i), x);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    dist_.reserve(order.size());
    double cm = 0.0, cw = 0.0;
    for (std::size_t i : order) {
      cm += mu.mass(i);
      cw += w.lumped(i);
      dist_.push_back(d[i]);
      cum_mu_.push_back(cm);
      cum_w_.push_back(cw);
    }
    for (const auto& a : mu.atoms())
      if (a.mass > 0.0) atoms_.emplace_back(distance(a.location, x), a.mass);
    std::sort(atoms_.begin(), atoms_.end());
  }

  /// (μ(B), w(B)) for the closed ball of radius r; `left` drops atoms at
  /// distance exactly r (the left limit in r).
  std::pair<double, double> at(double r, bool left) const {
    const auto it = std::upper_bound(dist_.begin(), dist_.end(), r);
    const std::size_t n = static_cast<std::size_t>(it - dist_.begin());
    double mu = n ? cum_mu_[n - 1] : 0.0;
    const double wb = n ? cum_w_[n - 1] : 0.0;
    for (const auto& [d, mass] : atoms_) {
      if (d > r || (left && d == r)) break;
      mu += mass;
    }
    return {mu, wb};
  }

  /// Sorted distinct radii in (lo, hi) where a ball mass jumps, with lo and
  /// hi prepended and appended.
  std::vector<double> breakpoints(double lo, double hi) const {
    std::vector<double> cuts{lo};
    auto add = [&](double d) {
      if (d > lo && d < hi) cuts.push_back(d);
    };
    for (double d : dist_) add(d);
    for (const auto& a : atoms_) add(a.first);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    cuts.push_back(hi);
    return cuts;
  }

 private:
  std::vector<double> dist_;
  std::vector<double> cum_mu_;
  std::vector<double> cum_w_;
  std::vector<std::pair<double, double>> atoms_;
};

}  // namespace

double wolff_potential(const MeasureData& mu, const Weight& w, Point x, double R, double p) {
  if (mu.mesh().get() != w.mesh().get()) throw Error("wolff_potential: mismatched mesh");
  if (!(R > 0.0)) throw Error("wolff_potential: R must be positive");
  if (!(p > 1.0)) throw Error("wolff_potential: p must exceed 1");
  if (mu.is_zero()) return 0.0;
  const Mesh& m = *mu.mesh();
  const BallMasses balls(mu, w, x);
  const double r_min = m.local_size(m.nearest_node(x));
  if (R <= r_min) return 0.0;
  const double expo = 1.0 / (p - 1.0);
  const double pc = p / (p - 1.0);

  // Between consecutive breakpoints μ(B) and w(B) are constant, and
  // ∫_a^b (r^p c)^{1/(p-1)} dr/r = c^{1/(p-1)} (b^{p'} - a^{p'}) / p'.
  std::vector<double> cuts = balls.breakpoints(r_min, R);
  double total = 0.0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double a = cuts[c], b = cuts[c + 1];
    const auto [mb, wb] = balls.at(a, false);
    if (mb <= 0.0) continue;
    if (!(wb > 0.0)) throw Error("wolff_potential: w(B) vanishes; mesh under-resolved at this point");
    total += std::pow(mb / wb, expo) * (std::pow(b, pc) - std::pow(a, pc)) / pc;
  }
  return total;
}

namespace {

double ball_inf(const DiscreteFunction& u, Point x, double R) {
  const Mesh& m = *u.mesh();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m.num_nodes(); ++i)
    if (distance(m.node(i), x) <= R) best = std::min(best, u[i]);
  const int n_dir = m.dimension() == 1 ? 2 : 32;
  for (int k = 0; k < n_dir; ++k) {
    const double th = 2.0 * M_PI * k / n_dir;
    const Point y = m.dimension() == 1 ? Point{x.x + (k == 0 ? R : -R), 0.0}
                                       : Point{x.x + R * std::cos(th), x.y + R * std::sin(th)};
    if (m.locate(y)) best = std::min(best, u.value_at(y));
  }
  return best;
}

double safe_ratio(double num, double den) {
  if (num <= 0.0) return 0.0;
  if (den <= 0.0) return std::numeric_limits<double>::infinity();
  return num / den;
}

}  // namespace

SandwichReport wolff_sandwich_check(const DiscreteFunction& u, const MeasureData& mu, const Weight& w, double p,
                                    const std::vector<Point>& samples, double R, double C_cap) {
  if (u.mesh().get() != mu.mesh().get()) throw Error("wolff_sandwich_check: mismatched mesh");
  SandwichReport rep;
  rep.C_cap = C_cap;
  const Geometry& geo = u.mesh()->geometry();
  for (const Point& x : samples) {
    if (!geo.contains(x) || geo.distance_to_boundary(x) < 2.0 * R) {
      ++rep.skipped;
      continue;
    }
    WolffSample s;
    s.x = x;
    s.u = u.value_at(x);
    s.wolff_R = wolff_potential(mu, w, x, R, p);
    s.wolff_2R = wolff_potential(mu, w, x, 2.0 * R, p);
    s.inf_u = ball_inf(u, x, R);
    s.lower_ratio = safe_ratio(s.wolff_R, s.u);
    s.upper_ratio = safe_ratio(s.u, s.inf_u + s.wolff_2R);
    rep.C_required = std::max({rep.C_required, s.lower_ratio, s.upper_ratio});
    rep.samples.push_back(s);
  }
  if (rep.samples.empty()) throw Error("wolff_sandwich_check: no admissible samples (domain too small for R)");
  rep.passed = rep.C_required <= C_cap;
  return rep;
}

}  // namespace plap
