#include "plap/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace plap {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

namespace {

double segment_distance(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, a + t * ab);
}

double signed_area(const std::vector<Point>& poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % poly.size()];
    s += a.x * b.y - b.x * a.y;
  }
  return 0.5 * s;
}

double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }

bool segments_intersect(Point p1, Point p2, Point q1, Point q2) {
  auto orient = [](Point a, Point b, Point c) {
    const double v = cross(b - a, c - a);
    return (v > 0) - (v < 0);
  };
  auto on_segment = [](Point a, Point b, Point c) {
    return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= c.y &&
           c.y <= std::max(a.y, b.y);
  };
  const int o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
  const int o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

}  // namespace

double Geometry::distance_to_boundary(Point p) const {
  if (kind == Kind::interval) return std::min(std::abs(p.x - a), std::abs(b - p.x));
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < vertices.size(); ++i)
    d = std::min(d, segment_distance(p, vertices[i], vertices[(i + 1) % vertices.size()]));
  return d;
}

bool Geometry::contains(Point p) const {
  if (kind == Kind::interval) return p.x >= a && p.x <= b;
  if (distance_to_boundary(p) == 0.0) return true;
  bool inside = false;
  for (std::size_t i = 0, j = vertices.size() - 1; i < vertices.size(); j = i++) {
    const Point& vi = vertices[i];
    const Point& vj = vertices[j];
    if ((vi.y > p.y) != (vj.y > p.y) && p.x < (vj.x - vi.x) * (p.y - vi.y) / (vj.y - vi.y) + vi.x)
      inside = !inside;
  }
  return inside;
}

double Geometry::measure() const {
  return kind == Kind::interval ? b - a : signed_area(vertices);
}

Mesh::Mesh(int dimension, Geometry geometry, std::vector<Point> nodes,
           std::vector<std::array<int, 3>> cells)
    : dim_(dimension), geometry_(std::move(geometry)), nodes_(std::move(nodes)),
      cells_(std::move(cells)) {
  if (dim_ != 1 && dim_ != 2) throw Error("mesh dimension must be 1 or 2");
  const std::size_t n = nodes_.size();
  delta_.resize(n);
  boundary_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    delta_[i] = geometry_.distance_to_boundary(nodes_[i]);
    boundary_[i] = delta_[i] == 0.0 ? 1 : 0;
  }

  const std::size_t m = cells_.size();
  volume_.resize(m);
  barycenter_.resize(m);
  cell_delta_.resize(m);
  grads_.resize(m);
  local_size_.assign(n, 0.0);
  for (std::size_t c = 0; c < m; ++c) {
    const auto idx = cell(c);
    for (int k = 0; k <= dim_; ++k) {
      if (idx[k] < 0 || static_cast<std::size_t>(idx[k]) >= n) throw Error("cell references missing node");
      for (int l = 0; l < k; ++l)
        if (idx[k] == idx[l]) throw Error("cell has repeated nodes");
    }
    if (dim_ == 1) {
      const double x0 = nodes_[idx[0]].x, x1 = nodes_[idx[1]].x;
      const double len = x1 - x0;
      if (!(len > 0.0)) throw Error("interval cell must have positive length");
      volume_[c] = len;
      barycenter_[c] = {0.5 * (x0 + x1), 0.0};
      grads_[c] = {Point{-1.0 / len, 0.0}, Point{1.0 / len, 0.0}, Point{}};
      for (int k = 0; k < 2; ++k) local_size_[idx[k]] = std::max(local_size_[idx[k]], len);
    } else {
      const Point p0 = nodes_[idx[0]], p1 = nodes_[idx[1]], p2 = nodes_[idx[2]];
      const double det = cross(p1 - p0, p2 - p0);
      if (!(det > 0.0)) throw Error("triangle must be counterclockwise with positive area");
      volume_[c] = 0.5 * det;
      barycenter_[c] = (1.0 / 3.0) * (p0 + p1 + p2);
      // ∇λ_k = rot(edge opposite k) / det
      grads_[c] = {Point{(p1.y - p2.y) / det, (p2.x - p1.x) / det},
                   Point{(p2.y - p0.y) / det, (p0.x - p2.x) / det},
                   Point{(p0.y - p1.y) / det, (p1.x - p0.x) / det}};
      const double e = std::max({distance(p0, p1), distance(p1, p2), distance(p2, p0)});
      for (int k = 0; k < 3; ++k) local_size_[idx[k]] = std::max(local_size_[idx[k]], e);
    }
    cell_delta_[c] = geometry_.distance_to_boundary(barycenter_[c]);
  }
}

double Mesh::max_delta() const {
  return delta_.empty() ? 0.0 : *std::max_element(delta_.begin(), delta_.end());
}

double Mesh::measure() const {
  double s = 0.0;
  for (double v : volume_) s += v;
  return s;
}

std::size_t Mesh::nearest_node(Point p) const {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const double d = distance(p, nodes_[i]);
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

std::optional<CellLocation> Mesh::locate(Point p) const {
  constexpr double kSlack = 1e-12;
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const auto idx = cell(c);
    CellLocation loc{c, {}};
    const Point p0 = nodes_[idx[0]];
    double sum = 0.0;
    bool inside = true;
    for (int k = 1; k <= dim_; ++k) {
      const double lam = dot(grads_[c][k], p - p0);
      loc.barycentric[k] = lam;
      sum += lam;
      if (lam < -kSlack) inside = false;
    }
    loc.barycentric[0] = 1.0 - sum;
    if (loc.barycentric[0] < -kSlack) inside = false;
    if (dim_ == 1 && std::abs(p.y) > kSlack) inside = false;
    if (inside) {
      for (int k = 0; k <= dim_; ++k) loc.barycentric[k] = std::max(loc.barycentric[k], 0.0);
      return loc;
    }
  }
  return std::nullopt;
}

void Mesh::write(std::ostream& os) const {
  const auto old_prec = os.precision(17);
  os << "# plap mesh v1\n";
  os << "dimension " << dim_ << "\n";
  if (geometry_.kind == Geometry::Kind::interval) {
    os << "geometry interval " << geometry_.a << " " << geometry_.b << "\n";
  } else {
    os << "geometry polygon " << geometry_.vertices.size();
    for (const auto& v : geometry_.vertices) os << " " << v.x << " " << v.y;
    os << "\n";
  }
  os << "nodes " << nodes_.size() << "\n";
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    os << nodes_[i].x;
    if (dim_ == 2) os << " " << nodes_[i].y;
    os << " " << static_cast<int>(boundary_[i]) << " " << delta_[i] << "\n";
  }
  os << "cells " << cells_.size() << "\n";
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const auto idx = cell(c);
    for (int k = 0; k <= dim_; ++k) os << (k ? " " : "") << idx[k];
    os << "\n";
  }
  os.precision(old_prec);
}

MeshPtr Mesh::read(std::istream& is) {
  std::string line;
  auto next = [&]() -> std::istringstream {
    while (std::getline(is, line)) {
      if (line.empty() || line[0] == '#') continue;
      return std::istringstream(line);
    }
    throw Error("unexpected end of mesh file");
  };
  std::string key;
  int dim = 0;
  {
    auto ls = next();
    ls >> key >> dim;
    if (key != "dimension") throw Error("mesh file: expected 'dimension'");
  }
  Geometry geo;
  {
    auto ls = next();
    std::string kind;
    ls >> key >> kind;
    if (key != "geometry") throw Error("mesh file: expected 'geometry'");
    if (kind == "interval") {
      geo.kind = Geometry::Kind::interval;
      ls >> geo.a >> geo.b;
    } else if (kind == "polygon") {
      geo.kind = Geometry::Kind::polygon;
      std::size_t nv = 0;
      ls >> nv;
      geo.vertices.resize(nv);
      for (auto& v : geo.vertices) ls >> v.x >> v.y;
    } else {
      throw Error("mesh file: unknown geometry '" + kind + "'");
    }
    if (!ls) throw Error("mesh file: malformed geometry line");
  }
  std::size_t n = 0;
  {
    auto ls = next();
    ls >> key >> n;
    if (key != "nodes") throw Error("mesh file: expected 'nodes'");
  }
  std::vector<Point> nodes(n);
  for (auto& p : nodes) {
    auto ls = next();
    int flag = 0;
    double delta = 0.0;
    ls >> p.x;
    if (dim == 2) ls >> p.y;
    ls >> flag >> delta;
    if (!ls) throw Error("mesh file: malformed node line");
  }
  std::size_t m = 0;
  {
    auto ls = next();
    ls >> key >> m;
    if (key != "cells") throw Error("mesh file: expected 'cells'");
  }
  std::vector<std::array<int, 3>> cells(m);
  for (auto& c : cells) {
    auto ls = next();
    c = {0, 0, 0};
    for (int k = 0; k <= dim; ++k) ls >> c[k];
    if (!ls) throw Error("mesh file: malformed cell line");
  }
  // Boundary flags and δ are recomputed from the exact geometry.
  return std::make_shared<const Mesh>(dim, std::move(geo), std::move(nodes), std::move(cells));
}

MeshPtr build_interval_mesh(double a, double b, int n_cells) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) throw Error("interval mesh: need finite a < b");
  if (n_cells < 2) throw Error("interval mesh: n_cells must be at least 2");
  std::vector<Point> nodes(n_cells + 1);
  for (int i = 0; i <= n_cells; ++i) {
    // Endpoints are exact so that δ vanishes there.
    nodes[i] = {i == n_cells ? b : a + (b - a) * static_cast<double>(i) / n_cells, 0.0};
  }
  std::vector<std::array<int, 3>> cells(n_cells);
  for (int i = 0; i < n_cells; ++i) cells[i] = {i, i + 1, 0};
  Geometry geo;
  geo.kind = Geometry::Kind::interval;
  geo.a = a;
  geo.b = b;
  return std::make_shared<const Mesh>(1, std::move(geo), std::move(nodes), std::move(cells));
}

MeshPtr build_polygon_mesh(const std::vector<Point>& polygon, double h) {
  if (!(h > 0.0)) throw Error("polygon mesh: h must be positive");
  const std::size_t nv = polygon.size();
  if (nv < 4) throw Error("polygon mesh: unsupported polygon (need a rectilinear polygon)");
  double shortest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nv; ++i) {
    const Point a = polygon[i], b = polygon[(i + 1) % nv];
    const bool horizontal = a.y == b.y && a.x != b.x;
    const bool vertical = a.x == b.x && a.y != b.y;
    if (!horizontal && !vertical) throw Error("polygon mesh: unsupported polygon (edges must be axis-aligned)");
    shortest = std::min(shortest, distance(a, b));
  }
  for (std::size_t i = 0; i < nv; ++i)
    for (std::size_t j = i + 2; j < nv; ++j) {
      if (i == 0 && j == nv - 1) continue;
      if (segments_intersect(polygon[i], polygon[(i + 1) % nv], polygon[j], polygon[(j + 1) % nv]))
        throw Error("polygon mesh: polygon is not simple");
    }
  if (!(signed_area(polygon) > 0.0)) throw Error("polygon mesh: polygon must be counterclockwise");
  if (h > shortest) throw Error("polygon mesh: h larger than the shortest edge");

  Geometry geo;
  geo.kind = Geometry::Kind::polygon;
  geo.vertices = polygon;

  auto breakpoints = [&](bool use_x) {
    std::vector<double> v;
    for (const auto& p : polygon) v.push_back(use_x ? p.x : p.y);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    std::vector<double> grid;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      const int pieces = std::max(1, static_cast<int>(std::ceil((v[i + 1] - v[i]) / h - 1e-9)));
      for (int k = 0; k < pieces; ++k) grid.push_back(v[i] + (v[i + 1] - v[i]) * k / pieces);
    }
    grid.push_back(v.back());
    return grid;
  };
  const auto xs = breakpoints(true);
  const auto ys = breakpoints(false);
  const std::size_t nx = xs.size(), ny = ys.size();

  std::vector<char> keep((nx - 1) * (ny - 1), 0);
  std::vector<char> used(nx * ny, 0);
  for (std::size_t j = 0; j + 1 < ny; ++j)
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      const Point center{0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])};
      if (geo.contains(center)) {
        keep[j * (nx - 1) + i] = 1;
        used[j * nx + i] = used[j * nx + i + 1] = used[(j + 1) * nx + i] = used[(j + 1) * nx + i + 1] = 1;
      }
    }
  std::vector<int> id(nx * ny, -1);
  std::vector<Point> nodes;
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i)
      if (used[j * nx + i]) {
        id[j * nx + i] = static_cast<int>(nodes.size());
        nodes.push_back({xs[i], ys[j]});
      }
  std::vector<std::array<int, 3>> cells;
  for (std::size_t j = 0; j + 1 < ny; ++j)
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      if (!keep[j * (nx - 1) + i]) continue;
      const int n00 = id[j * nx + i], n10 = id[j * nx + i + 1];
      const int n01 = id[(j + 1) * nx + i], n11 = id[(j + 1) * nx + i + 1];
      cells.push_back({n00, n10, n11});
      cells.push_back({n00, n11, n01});
    }
  return std::make_shared<const Mesh>(2, std::move(geo), std::move(nodes), std::move(cells));
}

Weight::Weight(MeshPtr mesh, double exponent) : mesh_(std::move(mesh)), exponent_(exponent) {
  if (!mesh_) throw Error("weight: null mesh");
  if (!std::isfinite(exponent_)) throw Error("weight: exponent must be finite");
  const Mesh& m = *mesh_;
  nodal_.resize(m.num_nodes());
  for (std::size_t i = 0; i < m.num_nodes(); ++i) {
    const double d = m.delta(i);
    if (exponent_ == 0.0)
      nodal_[i] = 1.0;
    else if (d > 0.0)
      nodal_[i] = std::pow(d, exponent_);
    else
      nodal_[i] = exponent_ > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  cell_.resize(m.num_cells());
  lumped_.assign(m.num_nodes(), 0.0);
  const double share = 1.0 / m.nodes_per_cell();
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    cell_[c] = exponent_ == 0.0 ? 1.0 : std::max(std::pow(m.cell_delta(c), exponent_), kFloor);
    for (int node : m.cell(c)) lumped_[node] += cell_[c] * m.volume(c) * share;
  }
}

double Weight::at(Point x) const {
  if (exponent_ == 0.0) return 1.0;
  return std::max(std::pow(mesh_->geometry().distance_to_boundary(x), exponent_), kFloor);
}

Weight power_weight(MeshPtr mesh, double t) { return Weight(std::move(mesh), t); }

}  // namespace plap
