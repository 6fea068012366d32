#include "plap/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "plap/csv.hpp"

namespace plap {

OperatorA::OperatorA(double p, std::vector<double> diagonal) : p_(p), diag_(std::move(diagonal)) {
  if (!(p_ > 1.0) || !std::isfinite(p_)) throw Error("operator: p must exceed 1");
  if (diag_.size() > 2) throw Error("operator: anisotropy has at most 2 entries");
  for (double d : diag_)
    if (!(d > 0.0) || !std::isfinite(d)) throw Error("operator: anisotropy entries must be positive");
}

bool OperatorA::isotropic() const {
  return std::all_of(diag_.begin(), diag_.end(), [](double d) { return d == 1.0; });
}

double OperatorA::alpha() const {
  if (diag_.empty()) return 1.0;
  return std::pow(*std::min_element(diag_.begin(), diag_.end()), 0.5 * p_);
}

double OperatorA::beta() const {
  if (diag_.empty()) return 1.0;
  return std::pow(*std::max_element(diag_.begin(), diag_.end()), 0.5 * p_);
}

Point OperatorA::apply_d(Point z) const {
  const double d0 = diag_.size() > 0 ? diag_[0] : 1.0;
  const double d1 = diag_.size() > 1 ? diag_[1] : 1.0;
  return {d0 * z.x, d1 * z.y};
}

Point OperatorA::flux(Point z, double w) const {
  const Point dz = apply_d(z);
  const double s = dot(z, dz);
  if (s == 0.0) return {};
  return (w * std::pow(s, 0.5 * (p_ - 2.0))) * dz;
}

std::string SolveReport::status() const {
  if (blow_up) return "blow_up";
  if (converged) return "converged";
  if (regularization_limited) return "regularization_limited";
  return "not_converged";
}

std::string SolveReport::csv_header() {
  return "status,iterations,residual,tolerance,energy,sup_norm,converged,blow_up,regularization_limited";
}

std::string SolveReport::csv_row() const {
  std::ostringstream os;
  os << status() << "," << iterations << "," << format_number(residual) << "," << format_number(tolerance)
     << "," << format_number(energy) << "," << format_number(sup_norm) << "," << converged << "," << blow_up
     << "," << regularization_limited;
  return os.str();
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

/// Regularized energy, gradient and Hessian over the free nodes.
class NewtonSystem {
 public:
  NewtonSystem(const Weight& w, const OperatorA& A, const DirichletProblem& prob)
      : mesh_(*w.mesh()), w_(w), A_(A), load_(prob.load) {
    const std::size_t n = mesh_.num_nodes();
    free_index_.assign(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
      const bool pinned = mesh_.is_boundary(i) || (!prob.pinned.empty() && prob.pinned[i]);
      if (!pinned) {
        free_index_[i] = static_cast<int>(free_nodes_.size());
        free_nodes_.push_back(i);
      }
    }
  }

  std::size_t num_free() const { return free_nodes_.size(); }
  const std::vector<std::size_t>& free_nodes() const { return free_nodes_; }
  int free_index(std::size_t node) const { return free_index_[node]; }

  Point grad(const std::vector<double>& u, std::size_t c) const {
    const auto idx = mesh_.cell(c);
    const auto& g = mesh_.basis_gradients(c);
    Point z;
    for (int k = 0; k < mesh_.nodes_per_cell(); ++k) z = z + u[idx[k]] * g[k];
    return z;
  }

  double energy(const std::vector<double>& u, double eps) const {
    const double p = A_.p();
    double e = 0.0;
    for (std::size_t c = 0; c < mesh_.num_cells(); ++c) {
      const Point z = grad(u, c);
      const double s = dot(z, A_.apply_d(z));
      const double base = eps * eps + s;
      if (base == 0.0) continue;
      e += mesh_.volume(c) * w_.cell_value(c) * std::pow(base, 0.5 * p) / p;
    }
    for (std::size_t i = 0; i < u.size(); ++i) e -= load_[i] * u[i];
    return e;
  }

  /// Gradient on all nodes (entries at pinned nodes are ignored by callers).
  std::vector<double> gradient(const std::vector<double>& u, double eps) const {
    const double p = A_.p();
    std::vector<double> g(u.size(), 0.0);
    for (std::size_t c = 0; c < mesh_.num_cells(); ++c) {
      const Point z = grad(u, c);
      const Point dz = A_.apply_d(z);
      const double base = eps * eps + dot(z, dz);
      if (base == 0.0) continue;
      const double a = mesh_.volume(c) * w_.cell_value(c) * std::pow(base, 0.5 * (p - 2.0));
      const auto idx = mesh_.cell(c);
      const auto& gl = mesh_.basis_gradients(c);
      for (int k = 0; k < mesh_.nodes_per_cell(); ++k) g[idx[k]] += a * dot(dz, gl[k]);
    }
    for (std::size_t i = 0; i < u.size(); ++i) g[i] -= load_[i];
    return g;
  }

  SpMat hessian(const std::vector<double>& u, double eps) const {
    const double p = A_.p();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(mesh_.num_cells() * 9);
    for (std::size_t c = 0; c < mesh_.num_cells(); ++c) {
      const Point z = grad(u, c);
      const Point dz = A_.apply_d(z);
      const double base = eps * eps + dot(z, dz);
      const double vw = mesh_.volume(c) * w_.cell_value(c);
      double a = 0.0, b = 0.0;
      if (p == 2.0) {
        a = vw;
      } else if (base > 0.0) {
        a = vw * std::pow(base, 0.5 * (p - 2.0));
        b = vw * (p - 2.0) * std::pow(base, 0.5 * (p - 4.0));
      }
      const auto idx = mesh_.cell(c);
      const auto& gl = mesh_.basis_gradients(c);
      for (int k = 0; k < mesh_.nodes_per_cell(); ++k) {
        const int fk = free_index_[idx[k]];
        if (fk < 0) continue;
        const Point dgk = A_.apply_d(gl[k]);
        for (int l = 0; l < mesh_.nodes_per_cell(); ++l) {
          const int fl = free_index_[idx[l]];
          if (fl < 0) continue;
          const double v = a * dot(dgk, gl[l]) + b * dot(dz, gl[k]) * dot(dz, gl[l]);
          trip.emplace_back(fk, fl, v);
        }
      }
    }
    SpMat H(static_cast<Eigen::Index>(num_free()), static_cast<Eigen::Index>(num_free()));
    H.setFromTriplets(trip.begin(), trip.end());
    return H;
  }

  /// Weighted Laplacian with D, used as a preconditioner for gradient steps.
  SpMat stiffness() const {
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t c = 0; c < mesh_.num_cells(); ++c) {
      const double vw = mesh_.volume(c) * w_.cell_value(c);
      const auto idx = mesh_.cell(c);
      const auto& gl = mesh_.basis_gradients(c);
      for (int k = 0; k < mesh_.nodes_per_cell(); ++k) {
        const int fk = free_index_[idx[k]];
        if (fk < 0) continue;
        for (int l = 0; l < mesh_.nodes_per_cell(); ++l) {
          const int fl = free_index_[idx[l]];
          if (fl >= 0) trip.emplace_back(fk, fl, vw * dot(A_.apply_d(gl[k]), gl[l]));
        }
      }
    }
    SpMat K(static_cast<Eigen::Index>(num_free()), static_cast<Eigen::Index>(num_free()));
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
  }

  double residual_norm(const std::vector<double>& g) const {
    double s = 0.0;
    for (std::size_t i : free_nodes_) s += std::abs(g[i]);
    return s;
  }

 private:
  const Mesh& mesh_;
  const Weight& w_;
  const OperatorA& A_;
  const std::vector<double>& load_;
  std::vector<int> free_index_;
  std::vector<std::size_t> free_nodes_;
};

double sup_abs(const std::vector<double>& u) {
  double s = 0.0;
  for (double v : u) s = std::max(s, std::abs(v));
  return s;
}

bool all_finite(const std::vector<double>& u) {
  return std::all_of(u.begin(), u.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

Solution solve_dirichlet(const Weight& w, const OperatorA& A, const DirichletProblem& prob,
                         const SolverOptions& opts, const std::vector<double>* initial) {
  const Mesh& mesh = *w.mesh();
  const std::size_t n = mesh.num_nodes();
  if (prob.load.size() != n) throw Error("solver: load vector size mismatch");
  if (!prob.pinned.empty() && (prob.pinned.size() != n || prob.pinned_values.size() != n))
    throw Error("solver: pinned mask size mismatch");
  for (double b : prob.load)
    if (!std::isfinite(b)) throw Error("solver: load must be finite");

  NewtonSystem sys(w, A, prob);
  std::vector<double> u(n, 0.0);
  if (initial) {
    if (initial->size() != n) throw Error("solver: initial guess size mismatch");
    u = *initial;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (mesh.is_boundary(i))
      u[i] = 0.0;
    else if (!prob.pinned.empty() && prob.pinned[i])
      u[i] = prob.pinned_values[i];
  }

  double mass = 0.0;
  for (std::size_t i : sys.free_nodes()) mass += std::abs(prob.load[i]);
  SolveReport rep;
  rep.tolerance = opts.tol * (1.0 + mass);

  std::vector<double> eps_stages;
  if (A.p() == 2.0) {
    eps_stages.push_back(0.0);
  } else {
    for (double e = opts.eps0; e > opts.eps_min * (1.0 + 1e-9); e *= opts.eps_factor) eps_stages.push_back(e);
    eps_stages.push_back(opts.eps_min);
  }

  auto finish = [&](bool blow) {
    rep.blow_up = blow;
    rep.sup_norm = sup_abs(u);
    if (blow) {
      rep.converged = false;
      for (double& v : u)
        if (!std::isfinite(v)) v = 0.0;
      return Solution{DiscreteFunction(w.mesh(), u, true), rep};
    }
    const auto g0 = sys.gradient(u, 0.0);
    rep.residual = sys.residual_norm(g0);
    rep.energy = sys.energy(u, 0.0);
    rep.converged = rep.residual <= rep.tolerance;
    rep.regularization_limited = !rep.converged && A.p() < 2.0;
    return Solution{DiscreteFunction(w.mesh(), u, true), rep};
  };

  if (sys.num_free() == 0) return finish(false);

  Eigen::SimplicialLDLT<SpMat> ldlt;
  bool pattern_ready = false;
  std::optional<Eigen::SimplicialLDLT<SpMat>> precond;

  Vec gfree(static_cast<Eigen::Index>(sys.num_free()));
  for (std::size_t stage = 0; stage < eps_stages.size(); ++stage) {
    const double eps = eps_stages[stage];
    const bool last = stage + 1 == eps_stages.size();
    const double stage_tol = last ? rep.tolerance : std::max(rep.tolerance, eps * (1.0 + mass));
    double J = sys.energy(u, eps);
    for (int it = 0; it < opts.max_iter; ++it) {
      const auto g = sys.gradient(u, eps);
      const double gnorm = sys.residual_norm(g);
      if (gnorm <= stage_tol) break;
      for (std::size_t k = 0; k < sys.num_free(); ++k) gfree[static_cast<Eigen::Index>(k)] = g[sys.free_nodes()[k]];

      const SpMat H = sys.hessian(u, eps);
      if (!pattern_ready) {
        ldlt.analyzePattern(H);
        pattern_ready = true;
      }
      ldlt.factorize(H);
      Vec d;
      bool newton_ok = ldlt.info() == Eigen::Success;
      if (newton_ok) {
        d = ldlt.solve(-gfree);
        newton_ok = d.allFinite() && gfree.dot(d) < 0.0;
      }
      if (!newton_ok) {
        if (!precond) {
          precond.emplace();
          precond->compute(sys.stiffness());
        }
        d = precond->solve(-gfree);
      }
      const double slope = gfree.dot(d);

      // Backtracking on the regularized energy; a roundoff-sized slack lets
      // the final quadratically convergent steps through.
      double t = 1.0;
      bool accepted = false;
      std::vector<double> trial(u);
      for (int ls = 0; ls < 60; ++ls) {
        for (std::size_t k = 0; k < sys.num_free(); ++k)
          trial[sys.free_nodes()[k]] = u[sys.free_nodes()[k]] + t * d[static_cast<Eigen::Index>(k)];
        if (!all_finite(trial) || sup_abs(trial) > opts.blow_up_threshold * 1e3) {
          t *= 0.5;
          continue;
        }
        const double Jt = sys.energy(trial, eps);
        if (Jt <= J + 1e-4 * t * slope + 1e-13 * (std::abs(J) + 1.0)) {
          accepted = true;
          J = Jt;
          break;
        }
        t *= 0.5;
      }
      ++rep.iterations;
      if (!accepted) break;  // stagnation at roundoff level
      u.swap(trial);
      if (sup_abs(u) > opts.blow_up_threshold) return finish(true);
    }
  }
  return finish(false);
}

Solution solve(const Weight& w, const OperatorA& A, const MeasureData& mu, const SolverOptions& opts,
               const DiscreteFunction* initial) {
  if (w.mesh().get() != mu.mesh().get()) throw Error("solve: mismatched mesh");
  if (initial && initial->mesh().get() != w.mesh().get()) throw Error("solve: mismatched mesh");
  DirichletProblem prob{mu.load_vector(), {}, {}};
  return solve_dirichlet(w, A, prob, opts, initial ? &initial->values() : nullptr);
}

double flux_pairing(const DiscreteFunction& u, const Weight& w, const OperatorA& A) {
  if (u.mesh().get() != w.mesh().get()) throw Error("flux_pairing: mismatched mesh");
  const Mesh& m = *u.mesh();
  double s = 0.0;
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const Point z = u.gradient(c);
    s += m.volume(c) * dot(A.flux(z, w.cell_value(c)), z);
  }
  return s;
}

std::vector<double> weak_residual(const DiscreteFunction& u, const Weight& w, const OperatorA& A,
                                  const std::vector<double>& load) {
  const Mesh& m = *u.mesh();
  if (load.size() != m.num_nodes()) throw Error("weak_residual: load size mismatch");
  std::vector<double> r(m.num_nodes(), 0.0);
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const Point F = m.volume(c) * A.flux(u.gradient(c), w.cell_value(c));
    const auto idx = m.cell(c);
    const auto& gl = m.basis_gradients(c);
    for (int k = 0; k < m.nodes_per_cell(); ++k) r[idx[k]] += dot(F, gl[k]);
  }
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= load[i];
  return r;
}

EnergyIdentity energy_identity_check(const DiscreteFunction& u, const Weight& w, const OperatorA& A,
                                     const MeasureData& mu) {
  return {A.alpha() * weighted_p_energy(u, w, A.p()), flux_pairing(u, w, A), measure_pairing(u, mu)};
}

ComparisonResult comparison_check(const Weight& w, const OperatorA& A, const MeasureData& mu,
                                  const MeasureData& nu, const SolverOptions& opts) {
  if (!mu.le(nu, 1e-14 * (1.0 + nu.total_mass()))) throw Error("comparison_check: requires mu <= nu");
  ComparisonResult res{false, 0.0, 0.0, solve(w, A, mu, opts), solve(w, A, nu, opts)};
  if (!res.lower.report.converged || !res.upper.report.converged)
    throw Error("comparison_check: solver did not converge");
  double violation = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < res.lower.u.size(); ++i)
    violation = std::max(violation, res.lower.u[i] - res.upper.u[i]);
  res.max_violation = violation;
  res.tolerance = 10.0 * opts.tol * (1.0 + res.upper.u.sup_norm());
  res.holds = violation <= res.tolerance;
  return res;
}

}  // namespace plap
