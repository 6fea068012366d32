#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace plap {

/// Library-wide error for invalid input or violated preconditions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
double distance(Point a, Point b);

/// Exact description of the domain boundary, used for δ at arbitrary points.
struct Geometry {
  enum class Kind { interval, polygon };
  Kind kind = Kind::interval;
  double a = 0.0;
  double b = 1.0;
  std::vector<Point> vertices;  // polygon only, counterclockwise

  /// Unsigned distance to ∂Ω; valid inside and outside the domain.
  double distance_to_boundary(Point p) const;
  bool contains(Point p) const;
  double measure() const;
};

/// Location of a point inside a simplex.
struct CellLocation {
  std::size_t cell = 0;
  std::array<double, 3> barycentric{};  // first dimension()+1 entries used
};

/// Simplicial mesh of a bounded interval or rectilinear polygon.
///
/// Nodes carry a boundary flag and the exact distance δ to ∂Ω. Per-cell
/// volumes, barycenter distances and the (constant) gradients of the
/// barycentric basis functions are precomputed. A Mesh is immutable once
/// built; share it through MeshPtr.
class Mesh {
 public:
  Mesh(int dimension, Geometry geometry, std::vector<Point> nodes,
       std::vector<std::array<int, 3>> cells);

  int dimension() const { return dim_; }
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_cells() const { return cells_.size(); }
  int nodes_per_cell() const { return dim_ + 1; }

  const std::vector<Point>& nodes() const { return nodes_; }
  Point node(std::size_t i) const { return nodes_[i]; }
  std::span<const int> cell(std::size_t c) const {
    return {cells_[c].data(), static_cast<std::size_t>(dim_ + 1)};
  }

  bool is_boundary(std::size_t i) const { return boundary_[i] != 0; }
  const std::vector<char>& boundary_mask() const { return boundary_; }
  double delta(std::size_t i) const { return delta_[i]; }
  const std::vector<double>& deltas() const { return delta_; }
  double max_delta() const;

  double volume(std::size_t c) const { return volume_[c]; }
  Point barycenter(std::size_t c) const { return barycenter_[c]; }
  double cell_delta(std::size_t c) const { return cell_delta_[c]; }
  /// Gradients of the barycentric coordinates of cell c, one per local node.
  const std::array<Point, 3>& basis_gradients(std::size_t c) const { return grads_[c]; }

  /// Sum of cell volumes, i.e. the discrete |Ω|.
  double measure() const;
  /// Longest edge among the cells touching node i.
  double local_size(std::size_t i) const { return local_size_[i]; }
  std::size_t nearest_node(Point p) const;

  const Geometry& geometry() const { return geometry_; }
  std::optional<CellLocation> locate(Point p) const;

  /// Plain-text node/element export. See README for the layout.
  void write(std::ostream& os) const;
  static std::shared_ptr<const Mesh> read(std::istream& is);

 private:
  int dim_;
  Geometry geometry_;
  std::vector<Point> nodes_;
  std::vector<std::array<int, 3>> cells_;
  std::vector<char> boundary_;
  std::vector<double> delta_;
  std::vector<double> volume_;
  std::vector<Point> barycenter_;
  std::vector<double> cell_delta_;
  std::vector<std::array<Point, 3>> grads_;
  std::vector<double> local_size_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Uniform mesh of [a, b] with n_cells cells.
MeshPtr build_interval_mesh(double a, double b, int n_cells);

/// Structured triangulation of an axis-aligned counterclockwise polygon
/// (rectangles, the L-shape, and other rectilinear shapes). Each edge between
/// consecutive distinct vertex coordinates is split into ceil(len / h) pieces.
MeshPtr build_polygon_mesh(const std::vector<Point>& polygon, double h);

/// Model weight w = δ^t on a mesh.
///
/// Quadrature uses the per-cell value δ(barycenter)^t, floored at kFloor.
/// Nodal values are informational: interior nodes hold δ^t, boundary nodes
/// hold the one-sided limit (0 for t > 0, 1 for t = 0, +inf for t < 0).
class Weight {
 public:
  static constexpr double kFloor = 1e-14;

  Weight(MeshPtr mesh, double exponent);

  const MeshPtr& mesh() const { return mesh_; }
  double exponent() const { return exponent_; }
  bool is_constant() const { return exponent_ == 0.0; }
  double nodal(std::size_t i) const { return nodal_[i]; }
  const std::vector<double>& nodal_values() const { return nodal_; }
  double cell_value(std::size_t c) const { return cell_[c]; }
  /// Node-lumped w-measure: Σ over incident cells of w_T |T| / (d + 1).
  double lumped(std::size_t i) const { return lumped_[i]; }
  /// Pointwise δ(x)^t, for x away from ∂Ω.
  double at(Point x) const;

 private:
  MeshPtr mesh_;
  double exponent_;
  std::vector<double> nodal_;
  std::vector<double> cell_;
  std::vector<double> lumped_;
};

Weight power_weight(MeshPtr mesh, double t);
inline Weight constant_weight(MeshPtr mesh) { return power_weight(std::move(mesh), 0.0); }

}  // namespace plap
