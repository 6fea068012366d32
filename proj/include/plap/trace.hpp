#pragma once

#include <optional>
#include <string>
#include <vector>

#include "plap/potential.hpp"

namespace plap {

struct TraceOptions {
  int restarts = 5;
  int max_iter = 400;
  double rel_tol = 1e-10;
  int max_levels = 256;  // superlevel sets scanned per weak-ascent step
  SolverOptions solver;
};

/// Lower estimate of the best constant in ‖f‖_{L^q(σ)} <= C ‖∇f‖_{L^p(w)}
/// (or its weak-type version), with the function that attains it.
struct TraceEstimate {
  double p = 2.0;
  double q = 1.0;
  bool weak = false;
  double C_hat = 0.0;
  DiscreteFunction maximizer;
  int restarts_used = 0;
  int iterations = 0;
};

/// ‖f‖_{L^q(σ)} / ‖∇f‖_{L^p(w)}; 0 for f ≡ 0.
double trace_quotient(const DiscreteFunction& f, const Weight& w, const MeasureData& sigma, double p, double q);
/// ‖f‖_{L^{q,∞}(σ)} / ‖∇f‖_{L^p(w)}; 0 for f ≡ 0.
double weak_trace_quotient(const DiscreteFunction& f, const Weight& w, const MeasureData& sigma, double p, double q);

/// Maximizes the trace quotient over nonnegative zero-trace functions by the
/// nonlinear power iteration f <- (f^{1-θ} g^θ)/sup, -Δ_{p,w} g = σ f^{q-1},
/// from deterministic seeds: 1, δ^{1/4}, δ^{1/2}, δ, and `previous`.
TraceEstimate estimate_trace_constant(const Weight& w, const MeasureData& sigma, double p, double q,
                                      const TraceOptions& opts = {}, const DiscreteFunction* previous = nullptr);

/// Maximizes the weak quotient by greedy search over superlevel sets K of the
/// current iterate, replacing it with the capacity potential of the best K.
/// Seeds: the W^0 σ potential, the seeds above, and `previous`.
TraceEstimate estimate_weak_trace_constant(const Weight& w, const MeasureData& sigma, double p, double q,
                                           const TraceOptions& opts = {},
                                           const DiscreteFunction* previous = nullptr);

struct CapacityResult {
  std::vector<char> K;
  double cap = 0.0;
  DiscreteFunction minimizer;
  SolveReport report;
};

/// Condenser capacity: min ∫|∇u|^p w over zero-trace u with u = 1 on K.
CapacityResult capacity(const Weight& w, double p, const std::vector<char>& K, const SolverOptions& opts = {});

/// σ(K) for a node set; an atom counts when every node of its cell that
/// carries barycentric weight lies in K.
double measure_of_set(const MeasureData& sigma, const std::vector<char>& K);

struct CapacitaryRow {
  int j = 0;
  double level = 0.0;
  int nodes = 0;
  double sigma_K = 0.0;
  double cap = 0.0;
  double residual_C2 = 0.0;  // C2^p cap - σ(K)^{p/q}
  double residual_C3 = 0.0;  // C3 (cap^{q/p} + 1) - σ(K)
};

struct CapacitaryReport {
  std::vector<CapacitaryRow> rows;
  double C2 = 0.0;
  double C3 = 0.0;
  double C2_min = 0.0;  // smallest C2 valid on the family
  double C3_min = 0.0;  // smallest C3 valid on the family
  bool passed = false;
};

/// Tabulates both capacitary conditions on E_j = {u > 2^j}. C3 < 0 uses
/// C3_min. Throws when no level set is nonempty.
CapacitaryReport capacitary_condition_check(const Weight& w, const MeasureData& sigma, double p, double q, double C2,
                                            const DiscreteFunction& u, double C3 = -1.0,
                                            const SolverOptions& opts = {});

struct HardyResult {
  double p = 2.0;
  double t = 0.0;
  double constant = 0.0;  // Rayleigh ascent value
  DiscreteFunction maximizer;
  bool has_oracle = false;
  double oracle = 0.0;  // dense generalized eigenvalue (p = 2 only)
  int iterations = 0;
};

/// Best constant in ∫|f|^p δ^{t-p} <= C ∫|∇f|^p δ^t on the mesh of w = δ^t.
/// For p = 2 and at most `dense_limit` interior nodes the dense generalized
/// eigenvalue is also computed. Refuses t outside (-1, p-1).
HardyResult hardy_check(const Weight& w, double p, const TraceOptions& opts = {}, int dense_limit = 3000);

/// Largest λ with M f = λ K f for the lumped δ^{t-2} mass matrix M and the
/// weighted stiffness K on interior nodes.
double hardy_dense_oracle(const Weight& w);

struct EnergySandwichReport {
  double p = 2.0, q = 1.0, alpha = 1.0, beta = 1.0;
  Verdict verdict = Verdict::undecided;
  double C_hat = 0.0;
  double E = 0.0;  // ‖∇ u^{(p-1)/(p-q)}‖^{p-q}
  double M = 0.0;  // (∫ u^{q(p-1)/(p-q)} dσ)^{(p-q)/(qp)}
  double lower_E = 0.0, lower_M = 0.0;
  double C_plus = 0.0;
  double upper_E = 0.0, upper_M = 0.0;
  double slack = 0.0;
  bool lower_ok = false, upper_ok = false, passed = false;
  DiscreteFunction u;
  TraceEstimate estimate;
};

/// Two-sided energy bounds for u = W_A σ in terms of the trace constant.
/// Bounds are checked with relative slack.
EnergySandwichReport verify_energy_sandwich(const Weight& w, const OperatorA& A, const MeasureData& sigma, double q,
                                  double slack = 0.02, const TraceOptions& opts = {},
                                  const ExhaustionSchedule& sched = {});

struct WeakSandwichReport {
  double p = 2.0, q = 1.0, alpha = 1.0, beta = 1.0;
  Verdict verdict = Verdict::undecided;
  double C_hat = 0.0;
  double mid = 0.0;  // ‖u‖_{L^{q(p-1)/(p-q),∞}(σ)}^{(p-1)/p}
  double lower = 0.0;
  double C_plus = 0.0;
  double upper = 0.0;
  double slack = 0.0;
  bool lower_ok = false, upper_ok = false, passed = false;
  DiscreteFunction u;
  TraceEstimate estimate;
};

/// Weak-type analogue of verify_energy_sandwich.
WeakSandwichReport verify_weak_sandwich(const Weight& w, const OperatorA& A, const MeasureData& sigma, double q,
                              double slack = 0.02, const TraceOptions& opts = {},
                              const ExhaustionSchedule& sched = {});

}  // namespace plap
