#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "plap/trace.hpp"

namespace plap {

/// h(u) = u^{-γ} (γ > 0) or h(u) = u^{q-1} (0 < q < 1, i.e. γ = 1 - q).
class SingularNonlinearity {
 public:
  enum class Kind { power_decreasing, power_sublinear };

  static SingularNonlinearity power_decreasing(double gamma);
  static SingularNonlinearity power_sublinear(double q);

  Kind kind() const { return kind_; }
  double parameter() const { return param_; }
  double gamma() const { return kind_ == Kind::power_decreasing ? param_ : 1.0 - param_; }
  double h(double u) const { return std::pow(u, -gamma()); }
  /// g(u) = ∫_0^u h(t)^{-1/(p-1)} dt = ((p-1)/(p-1+γ)) u^{(p-1+γ)/(p-1)}.
  double g(double u, double p) const;
  std::string describe() const;

 private:
  SingularNonlinearity(Kind k, double v) : kind_(k), param_(v) {}
  Kind kind_;
  double param_;
};

struct SingularOptions {
  int k_max = 12;
  int inner_max = 2000;
  double inner_tol = 1e-8;  // relative to 1 + sup u
  double omega = 0.7;       // reduced automatically when it would not contract
  ExhaustionSchedule exhaustion;
  SolverOptions solver;

  /// Shift ε_k added to u inside h at stage k: 2^{-k} or 1/k.
  enum class Shift { dyadic, harmonic };
  Shift shift_kind = Shift::dyadic;
  double shift(int k) const { return shift_kind == Shift::dyadic ? std::ldexp(1.0, -k) : 1.0 / k; }
};

struct SingularStage {
  int k = 0;
  double eps = 0.0;
  double r = 0.0;  // truncation radius (0 = whole mesh)
  int inner_iterations = 0;
  bool inner_converged = false;
  double inner_change = 0.0;
  std::vector<double> change_history;  // sup|S(u) - u| per inner iteration
  double sup = 0.0;
  double energy = 0.0;  // ∫|∇u_k|^p w
  double barrier_margin = 0.0;
};

struct SingularRunReport {
  std::vector<SingularStage> stages;
  int monotonicity_violations = 0;
  Verdict verdict = Verdict::undecided;
  bool blow_up = false;
  bool stages_settled = false;
  double omega = 0.0;
  int failed_stage = 0;
  double tolerance = 0.0;  // absolute inner tolerance of the last stage
};

struct SingularSolution {
  DiscreteFunction u;
  SingularRunReport report;
};

/// Approximating problems -div A(∇u_k) = σ_k h(max(u_k, 0) + ε_k), solved by
/// relaxed Picard iteration on the right-hand side, each stage warm-started
/// from the previous one. A finite σ is used whole at every stage; an
/// infinite one is truncated to {δ >= r_k}. `initial` replaces the zero
/// start of the first stage.
SingularSolution solve_singular(const Weight& w, const OperatorA& A, const MeasureData& sigma,
                                const SingularNonlinearity& nl, const SingularOptions& opts = {},
                                const DiscreteFunction* initial = nullptr);

/// Nodal g(u); throws on negative values.
DiscreteFunction g_transform(const DiscreteFunction& u, const SingularNonlinearity& nl, double p);

/// min over nodes of W^0 σ_k - g(u_k).
double barrier_check(const DiscreteFunction& u_k, const MeasureData& sigma_k, const Weight& w, const OperatorA& A,
                     const SingularNonlinearity& nl, const SolverOptions& opts = {});

struct EquivalenceLevel {
  double h = 0.0;
  double C_hat = 0.0;
  double grad_norm = 0.0;  // ‖∇u‖_{L^p(w)} of the singular solution
  bool solver_converged = false;
};

struct EquivalenceReport {
  double p = 2.0, q = 0.5, alpha = 1.0, beta = 1.0;
  std::vector<EquivalenceLevel> levels;
  double C_drift = 0.0;
  double energy_drift = 0.0;
  bool C_stable = false;
  bool energy_stable = false;
  double C_plus = 0.0;         // upper proxy for the trace constant on the finest level
  double forward_bound = 0.0;  // α^{-1/(p-q)} (C_plus)^{q/(p-q)}
  double reverse_bound = 0.0;  // β^{1/q} ‖∇u‖^{(p-q)/q}
  bool forward_ok = false;
  bool reverse_ok = false;
  std::string finding;
  bool passed = false;
};

/// Existence of a finite-energy solution of -div A(∇u) = σ u^{q-1} versus the
/// trace inequality, across a refinement family. Stability means a relative
/// drift of at most `drift_tol` between consecutive levels.
EquivalenceReport verify_solvability_equivalence(const std::vector<MeshPtr>& levels, double t, const OperatorA& A,
                                     const MeasureSpec& sigma, double q, const SingularOptions& opts = {},
                                     const TraceOptions& trace_opts = {}, double drift_tol = 0.05);

struct FiniteMassReport {
  double p = 2.0, gamma = 1.0, q = 1.0;
  double sigma_total = 0.0;
  double E_gamma = 0.0;  // ∫|∇ u^{(p-1+γ)/p}|^p w
  double ratio = 0.0;    // σ(Ω) / E_γ
  double lower = 0.0, upper = 0.0;
  double tol = 0.0;
  bool passed = false;
  SingularRunReport run;
};

/// σ(Ω)/E_γ against the explicit two-sided window, q = γp/(p-1+γ).
FiniteMassReport verify_finite_mass_window(const Weight& w, const OperatorA& A, const MeasureData& sigma, double gamma,
                         const SingularOptions& opts = {}, double tol = 1e-3);

struct PotentialBoundsReport {
  double sup_u = 0.0;
  double margin_g = 0.0;  // min(v - g(u))
  double margin_v = 0.0;  // min(u / h(sup u)^{1/(p-1)} - v)
  double tol = 0.0;
  bool lower_ok = false, upper_ok = false, passed = false;
};

/// g(u) <= v and v <= u / h(sup u)^{1/(p-1)} for v = W_A σ.
PotentialBoundsReport verify_potential_bounds(const Weight& w, const OperatorA& A, const MeasureData& sigma,
                                const SingularNonlinearity& nl, const SingularOptions& opts = {});

}  // namespace plap
