#pragma once

#include <optional>
#include <string>
#include <vector>

#include "plap/calculus.hpp"

namespace plap {

/// A(x, z) = w(x) (z·Dz)^{(p-2)/2} Dz with D = diag(d_1, ..., d_n) > 0.
///
/// This is the gradient in z of the convex density (1/p) w (z·Dz)^{p/2}, and
/// satisfies the structure conditions with α = d_min^{p/2}, β = d_max^{p/2}.
class OperatorA {
 public:
  explicit OperatorA(double p, std::vector<double> diagonal = {});

  double p() const { return p_; }
  const std::vector<double>& diagonal() const { return diag_; }
  bool isotropic() const;
  double alpha() const;
  double beta() const;

  /// D applied to z (missing entries default to 1).
  Point apply_d(Point z) const;
  Point flux(Point z, double w) const;

 private:
  double p_;
  std::vector<double> diag_;
};

struct SolverOptions {
  /// Converged when the residual <= tol * (1 + <μ, 1>).
  double tol = 1e-9;
  int max_iter = 200;  // Newton iterations per regularization stage
  double eps0 = 1e-2;
  double eps_min = 1e-10;
  double eps_factor = 0.1;
  double blow_up_threshold = 1e8;
};

/// Convergence record of one nonlinear solve.
///
/// `residual` is Σ_j |r_j| over free nodes, where r_j is the discrete weak
/// form residual against the hat function φ_j; this is the dual norm of the
/// residual with respect to max-norm bounded test functions.
struct SolveReport {
  int iterations = 0;
  double residual = 0.0;
  double tolerance = 0.0;
  double energy = 0.0;
  double sup_norm = 0.0;
  bool converged = false;
  bool blow_up = false;
  bool regularization_limited = false;

  std::string status() const;
  static std::string csv_header();
  std::string csv_row() const;
};

struct Solution {
  DiscreteFunction u;
  SolveReport report;
};

/// Dirichlet data for the low-level solver: nodal load b_j = <μ, φ_j> and
/// optional interior nodes pinned to given values. Boundary nodes are
/// always pinned to 0.
struct DirichletProblem {
  std::vector<double> load;
  std::vector<char> pinned;         // empty = none
  std::vector<double> pinned_values;
};

/// Minimize (1/p)∫(∇u·D∇u)^{p/2} w dx - <μ, u> over zero-trace functions.
Solution solve(const Weight& w, const OperatorA& A, const MeasureData& mu, const SolverOptions& opts = {},
               const DiscreteFunction* initial = nullptr);

Solution solve_dirichlet(const Weight& w, const OperatorA& A, const DirichletProblem& problem,
                         const SolverOptions& opts = {}, const std::vector<double>* initial = nullptr);

/// ∫ A(x, ∇u)·∇u dx.
double flux_pairing(const DiscreteFunction& u, const Weight& w, const OperatorA& A);

/// Nodal weak-form residual r_j = ∫A(∇u)·∇φ_j - b_j (all nodes).
std::vector<double> weak_residual(const DiscreteFunction& u, const Weight& w, const OperatorA& A,
                                  const std::vector<double>& load);

struct EnergyIdentity {
  double lhs = 0.0;  // α ∫|∇u|^p w
  double mid = 0.0;  // ∫ A(∇u)·∇u
  double rhs = 0.0;  // <μ, u>
};

EnergyIdentity energy_identity_check(const DiscreteFunction& u, const Weight& w, const OperatorA& A,
                                     const MeasureData& mu);

struct ComparisonResult {
  bool holds = false;
  double max_violation = 0.0;  // max_i (u_μ - u_ν)_i
  double tolerance = 0.0;
  Solution lower;
  Solution upper;
};

/// Solves for μ and ν (requires μ <= ν) and checks u_μ <= u_ν + tol.
ComparisonResult comparison_check(const Weight& w, const OperatorA& A, const MeasureData& mu,
                                  const MeasureData& nu, const SolverOptions& opts = {});

}  // namespace plap
