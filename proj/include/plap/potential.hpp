#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "plap/solver.hpp"

namespace plap {

/// Compact exhaustion F_k = {δ >= r_k}, r_k = r0 * ratio^{-k}, k = 1..k_max.
struct ExhaustionSchedule {
  double r0 = 0.0;            // 0 selects the largest δ on the mesh
  double ratio = 2.0;
  int k_max = 12;
  double density_cap0 = 0.0;  // M_0; stage k caps densities at M_0 * ratio^k (0 = off)
  int k_min = 1;              // growth test starts after this stage
  double cauchy_tol = 1e-6;
  int cauchy_stages = 2;
  double growth_factor = 0.10;
  int growth_stages = 5;

  double radius(const Mesh& mesh, int k) const;
  void validate() const;
};

struct StageRecord {
  int k = 0;
  double r = 0.0;
  double mass = 0.0;
  double sup = 0.0;
  double energy = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

enum class Verdict { converged, diverging, undecided };
std::string to_string(Verdict v);

struct PotentialResult {
  DiscreteFunction u;
  std::vector<StageRecord> stages;
  Verdict verdict = Verdict::undecided;
  int monotonicity_violations = 0;
  bool blow_up = false;
  int failed_stage = 0;  // first stage whose inner solve did not converge (0 = none)
  SolveReport last_report;
};

/// Monotone limit of solutions for the truncations 1_{F_k} σ. A measure with
/// finite total mass is solved once on the full mesh (one stage, r = 0).
PotentialResult wa_potential(const Weight& w, const OperatorA& A, const MeasureData& sigma,
                             const ExhaustionSchedule& sched = {}, const SolverOptions& opts = {});

/// CSV: k,r,mass,sup,energy,residual,iterations,converged
void write_stage_csv(std::ostream& os, const std::vector<StageRecord>& stages);

/// W^R μ(x) = ∫_0^R (r^p μ(B(x,r)) / w(B(x,r)))^{1/(p-1)} dr/r.
///
/// Balls are closed node sets and w(B) is the node-lumped weight mass, so
/// μ(B) and w(B) are step functions of r; the radial integral is evaluated
/// exactly between their jumps, from the local mesh size at x up to R
/// (smaller radii only see mesh noise). The result is therefore exactly
/// monotone in R and in μ. Throws when w(B) vanishes.
double wolff_potential(const MeasureData& mu, const Weight& w, Point x, double R, double p);

struct WolffSample {
  Point x;
  double u = 0.0;
  double wolff_R = 0.0;
  double wolff_2R = 0.0;
  double inf_u = 0.0;
  double lower_ratio = 0.0;  // W^R μ(x) / u(x)
  double upper_ratio = 0.0;  // u(x) / (inf_{B(x,R)} u + W^{2R} μ(x))
};

struct SandwichReport {
  std::vector<WolffSample> samples;
  int skipped = 0;
  double C_required = 1.0;
  double C_cap = 10.0;
  bool passed = false;
};

/// Checks (1/C) W^R μ <= u <= C (inf_{B(x,R)} u + W^{2R} μ) at samples with
/// B(x, 2R) inside Ω. Throws when no sample is admissible.
SandwichReport wolff_sandwich_check(const DiscreteFunction& u, const MeasureData& mu, const Weight& w, double p,
                                    const std::vector<Point>& samples, double R, double C_cap = 10.0);

}  // namespace plap
