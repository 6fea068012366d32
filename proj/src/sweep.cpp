#include "plap/sweep.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <ostream>
#include <thread>

#include "plap/csv.hpp"

namespace plap {

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (int k = 0; k < workers; ++k)
    pool.emplace_back([&] {
      for (int i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) err = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

namespace {

void evaluate(const ScenarioConfig& cfg, SweepRow& row) {
  const MeshPtr mesh = cfg.mesh(row.level);
  row.h = cfg.mesh_size(row.level);
  const Weight w = power_weight(mesh, row.t);
  MeasureSpec spec;
  spec.kind = MeasureSpec::Kind::power;
  spec.s = row.s;
  spec.scale = cfg.measure.scale;
  const MeasureData sigma = spec.build(mesh);
  OperatorA A(row.p, cfg.diagonal);
  TraceOptions topts = cfg.trace;
  const auto pot = wa_potential(w, A, sigma, cfg.exhaustion, cfg.solver);
  row.potential = to_string(pot.verdict);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (pot.verdict == Verdict::converged) {
    const auto r = verify_energy_sandwich(w, A, sigma, row.q, cfg.slack, topts, cfg.exhaustion);
    row.C_hat = r.C_hat;
    row.E = r.E;
    row.M = r.M;
    row.lower_E_res = r.E - r.lower_E;
    row.lower_M_res = r.M - r.lower_M;
    row.upper_E_res = r.upper_E - r.E;
    row.upper_M_res = r.upper_M - r.M;
    if (!r.passed) row.message = "energy bounds violated";
  } else {
    row.C_hat = estimate_trace_constant(w, sigma, row.p, row.q, topts).C_hat;
    row.E = row.M = std::numeric_limits<double>::infinity();
    row.lower_E_res = row.lower_M_res = row.upper_E_res = row.upper_M_res = nan;
  }
}

}  // namespace

std::vector<SweepRow> run_sweep(const ScenarioConfig& cfg, int levels, int workers) {
  std::vector<SweepRow> rows;
  for (double p : cfg.sweep_p)
    for (double t : cfg.sweep_t)
      for (double s : cfg.sweep_s)
        for (double q : cfg.sweep_q)
          for (int l = 0; l < levels; ++l) {
            SweepRow r;
            r.p = p;
            r.q = q;
            r.t = t;
            r.s = s;
            r.level = l;
            rows.push_back(r);
          }
  parallel_for(static_cast<int>(rows.size()), workers, [&](int i) {
    try {
      evaluate(cfg, rows[i]);
    } catch (const std::exception& e) {
      rows[i].status = "ERROR";
      rows[i].message = e.what();
    }
  });

  for (std::size_t g = 0; g < rows.size(); g += levels) {
    double drift = 0.0;
    bool error = false;
    for (int l = 0; l < levels; ++l) error = error || rows[g + l].status == "ERROR";
    for (int l = 1; l < levels; ++l) {
      const double a = rows[g + l - 1].C_hat, b = rows[g + l].C_hat;
      const double scale = std::max(std::abs(a), std::abs(b));
      if (scale > 0.0) drift = std::max(drift, std::abs(b - a) / scale);
    }
    const SweepRow& r0 = rows[g];
    const double thr = r0.p * (r0.s - 1.0) / (r0.p - 1.0 - r0.t);
    const std::string predicted = r0.q > thr ? "stable" : "unstable";
    const std::string observed = levels < 2 ? "n/a" : (drift <= cfg.drift_tol ? "stable" : "unstable");
    for (int l = 0; l < levels; ++l) {
      SweepRow& r = rows[g + l];
      r.C_drift = drift;
      r.predicted = predicted;
      r.observed = observed;
      if (r.status == "ERROR") continue;
      const bool bounds_ok = r.message.empty();
      const bool trend_ok = observed == "n/a" || observed == predicted;
      r.status = bounds_ok && trend_ok && !error ? "PASS" : "FAIL";
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "p,q,t,s,level,h,C_hat,E,M,lower_E_res,lower_M_res,upper_E_res,upper_M_res,potential,C_drift,predicted,"
        "observed,status\n";
  for (const auto& r : rows) {
    os << format_number(r.p) << ',' << format_number(r.q) << ',' << format_number(r.t) << ',' << format_number(r.s)
       << ',' << r.level << ',' << format_number(r.h) << ',' << format_number(r.C_hat) << ',' << format_number(r.E)
       << ',' << format_number(r.M) << ',' << format_number(r.lower_E_res) << ',' << format_number(r.lower_M_res)
       << ',' << format_number(r.upper_E_res) << ',' << format_number(r.upper_M_res) << ',' << r.potential << ','
       << format_number(r.C_drift) << ',' << r.predicted << ',' << r.observed << ',' << r.status << '\n';
  }
}

}  // namespace plap
