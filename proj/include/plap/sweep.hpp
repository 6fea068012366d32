#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "plap/config.hpp"

namespace plap {

/// One (p, q, t, s, level) point of an admissibility sweep with σ = δ^{-s} dx
/// and w = δ^t.
struct SweepRow {
  double p = 2.0, q = 1.0, t = 0.0, s = 1.0;
  int level = 0;
  double h = 0.0;
  double C_hat = 0.0;
  double E = 0.0, M = 0.0;
  // bound minus quantity (lower) and quantity minus bound (upper); >= 0 when the bound holds
  double lower_E_res = 0.0, lower_M_res = 0.0, upper_E_res = 0.0, upper_M_res = 0.0;
  std::string potential;  // verdict of the exhaustion for W σ
  double C_drift = 0.0;   // largest relative change of C_hat across the levels of this point
  std::string predicted;  // stable when q > p(s-1)/(p-1-t)
  std::string observed;   // stable | unstable | n/a (one level)
  std::string status;     // PASS | FAIL | ERROR
  std::string message;
};

/// Runs fn(0..n-1) on `workers` threads; each call must be independent.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

/// Grid order: p, t, s, q, then level. Rows come back in grid order
/// whatever the number of workers.
std::vector<SweepRow> run_sweep(const ScenarioConfig& cfg, int levels, int workers);

/// CSV: p,q,t,s,level,h,C_hat,E,M,lower_E_res,lower_M_res,upper_E_res,upper_M_res,
/// potential,C_drift,predicted,observed,status
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace plap
