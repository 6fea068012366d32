#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "plap/mesh.hpp"

namespace plap {

/// Continuous piecewise-linear function given by its nodal values.
class DiscreteFunction {
 public:
  /// Throws if a value is not finite, or if zero_trace is set and a boundary
  /// value is nonzero.
  DiscreteFunction(MeshPtr mesh, std::vector<double> values, bool zero_trace);

  static DiscreteFunction zeros(MeshPtr mesh);
  /// Nodal interpolant; boundary values are forced to 0 when zero_trace.
  static DiscreteFunction interpolate(MeshPtr mesh, const std::function<double(Point)>& f,
                                      bool zero_trace);

  const MeshPtr& mesh() const { return mesh_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  bool zero_trace() const { return zero_trace_; }

  /// Barycentric interpolation; throws for points outside the mesh.
  double value_at(Point x) const;
  Point gradient(std::size_t cell) const;
  double sup_norm() const;
  double min_value() const;

 private:
  MeshPtr mesh_;
  std::vector<double> values_;
  bool zero_trace_;
};

struct Atom {
  Point location;
  double mass = 0.0;
};

/// Nonnegative measure lumped onto mesh nodes, plus optional point atoms.
///
/// Densities are lumped per cell: each node of a cell T receives
/// density(barycenter_T) * |T| / (d + 1). For δ^{-s} with s >= 1 the
/// continuum measure is infinite; the discrete masses are finite on every
/// mesh and `infinite_total()` records the continuum status.
class MeasureData {
 public:
  MeasureData(MeshPtr mesh, std::vector<double> masses, std::vector<Atom> atoms = {},
              bool infinite_total = false);

  static MeasureData zero(MeshPtr mesh);
  static MeasureData lebesgue(MeshPtr mesh, double scale = 1.0);
  /// Density scale * δ^{-s}.
  static MeasureData power_density(MeshPtr mesh, double s, double scale = 1.0);
  static MeasureData from_density(MeshPtr mesh, const std::function<double(Point)>& density);
  static MeasureData atom(MeshPtr mesh, Point location, double mass = 1.0);

  const MeshPtr& mesh() const { return mesh_; }
  const std::vector<double>& masses() const { return masses_; }
  double mass(std::size_t i) const { return masses_[i]; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  bool infinite_total() const { return infinite_total_; }
  bool is_zero() const;

  /// Total discrete mass (nodes and atoms).
  double total_mass() const;
  /// σ({x : pred}) with atoms tested at their location.
  double mass_where(const std::function<bool(std::size_t node)>& node_pred,
                    const std::function<bool(const Atom&)>& atom_pred) const;

  /// Coefficients b_j = <σ, φ_j> of the nodal basis; atoms are split by
  /// barycentric weights. The pairing <σ, f> equals b · f exactly.
  std::vector<double> load_vector() const;

  MeasureData scaled(double t) const;
  MeasureData plus(const MeasureData& other) const;
  /// 1_F σ for F = {δ >= r}, with node masses optionally capped by
  /// density_cap * (lumped Lebesgue mass of the node).
  MeasureData truncated(double r, double density_cap = 0.0) const;
  /// Nodewise μ <= ν comparison of masses and load vectors.
  bool le(const MeasureData& other, double tol = 0.0) const;

 private:
  MeshPtr mesh_;
  std::vector<double> masses_;
  std::vector<Atom> atoms_;
  bool infinite_total_;
};

/// Recipe for building the same measure on different meshes.
struct MeasureSpec {
  enum class Kind { zero, lebesgue, power, atoms };
  Kind kind = Kind::lebesgue;
  double scale = 1.0;
  double s = 1.0;
  std::vector<Atom> atoms;

  MeasureData build(const MeshPtr& mesh) const;
};

/// ∫ |∇f|^p w dx, exact per cell with w at the barycenter.
double weighted_p_energy(const DiscreteFunction& f, const Weight& w, double p);
/// <σ, f> = Σ m_i f(x_i) + Σ atoms mass * f(location).
double measure_pairing(const DiscreteFunction& f, const MeasureData& sigma);
/// (Σ m_i |f_i|^q + atoms)^{1/q}.
double lq_norm(const DiscreteFunction& f, const MeasureData& sigma, double q);
/// Weak-L^q quasinorm sup_t t σ({|f| >= t})^{1/q}. On a discrete
/// distribution the supremum is the left limit at an attained value, so the
/// levels range over the attained |f| values.
double weak_lq_norm(const DiscreteFunction& f, const MeasureData& sigma, double q);

/// CSV: node,x[,y],value
void write_function_csv(std::ostream& os, const DiscreteFunction& f);
/// CSV: node,mass then an "atoms" section x[,y],mass
void write_measure_csv(std::ostream& os, const MeasureData& sigma);

}  // namespace plap
