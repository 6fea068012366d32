#include "plap/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "plap/csv.hpp"

namespace plap {

namespace {

void require_same_mesh(const MeshPtr& a, const MeshPtr& b, const char* what) {
  if (a.get() != b.get()) throw Error(std::string(what) + ": mismatched mesh");
}

}  // namespace

DiscreteFunction::DiscreteFunction(MeshPtr mesh, std::vector<double> values, bool zero_trace)
    : mesh_(std::move(mesh)), values_(std::move(values)), zero_trace_(zero_trace) {
  if (!mesh_) throw Error("discrete function: null mesh");
  if (values_.size() != mesh_->num_nodes()) throw Error("discrete function: wrong number of values");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) throw Error("discrete function: non-finite nodal value");
    if (zero_trace_ && mesh_->is_boundary(i) && values_[i] != 0.0)
      throw Error("discrete function: nonzero boundary value with zero trace");
  }
}

DiscreteFunction DiscreteFunction::zeros(MeshPtr mesh) {
  const std::size_t n = mesh->num_nodes();
  return DiscreteFunction(std::move(mesh), std::vector<double>(n, 0.0), true);
}

DiscreteFunction DiscreteFunction::interpolate(MeshPtr mesh, const std::function<double(Point)>& f,
                                               bool zero_trace) {
  std::vector<double> v(mesh->num_nodes());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = (zero_trace && mesh->is_boundary(i)) ? 0.0 : f(mesh->node(i));
  return DiscreteFunction(std::move(mesh), std::move(v), zero_trace);
}

double DiscreteFunction::value_at(Point x) const {
  const auto loc = mesh_->locate(x);
  if (!loc) throw Error("point outside the mesh");
  const auto idx = mesh_->cell(loc->cell);
  double v = 0.0;
  for (int k = 0; k < mesh_->nodes_per_cell(); ++k) v += loc->barycentric[k] * values_[idx[k]];
  return v;
}

Point DiscreteFunction::gradient(std::size_t c) const {
  const auto idx = mesh_->cell(c);
  const auto& g = mesh_->basis_gradients(c);
  Point z;
  for (int k = 0; k < mesh_->nodes_per_cell(); ++k) z = z + values_[idx[k]] * g[k];
  return z;
}

double DiscreteFunction::sup_norm() const {
  double s = 0.0;
  for (double v : values_) s = std::max(s, std::abs(v));
  return s;
}

double DiscreteFunction::min_value() const {
  return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

MeasureData::MeasureData(MeshPtr mesh, std::vector<double> masses, std::vector<Atom> atoms,
                         bool infinite_total)
    : mesh_(std::move(mesh)), masses_(std::move(masses)), atoms_(std::move(atoms)),
      infinite_total_(infinite_total) {
  if (!mesh_) throw Error("measure: null mesh");
  if (masses_.size() != mesh_->num_nodes()) throw Error("measure: wrong number of node masses");
  for (double m : masses_)
    if (!(m >= 0.0) || !std::isfinite(m)) throw Error("measure: node masses must be finite and >= 0");
  for (const auto& a : atoms_) {
    if (!(a.mass >= 0.0) || !std::isfinite(a.mass)) throw Error("measure: atom mass must be finite and >= 0");
    if (!mesh_->locate(a.location)) throw Error("measure: atom outside domain");
  }
}

MeasureData MeasureData::zero(MeshPtr mesh) {
  const std::size_t n = mesh->num_nodes();
  return MeasureData(std::move(mesh), std::vector<double>(n, 0.0));
}

MeasureData MeasureData::from_density(MeshPtr mesh, const std::function<double(Point)>& density) {
  std::vector<double> m(mesh->num_nodes(), 0.0);
  const double share = 1.0 / mesh->nodes_per_cell();
  for (std::size_t c = 0; c < mesh->num_cells(); ++c) {
    const double mass = density(mesh->barycenter(c)) * mesh->volume(c) * share;
    for (int node : mesh->cell(c)) m[node] += mass;
  }
  return MeasureData(std::move(mesh), std::move(m));
}

MeasureData MeasureData::lebesgue(MeshPtr mesh, double scale) {
  if (!(scale >= 0.0)) throw Error("measure: scale must be >= 0");
  return from_density(std::move(mesh), [scale](Point) { return scale; });
}

MeasureData MeasureData::power_density(MeshPtr mesh, double s, double scale) {
  if (!(scale >= 0.0)) throw Error("measure: scale must be >= 0");
  const Geometry& geo = mesh->geometry();
  auto base = from_density(mesh, [&](Point x) { return scale * std::pow(geo.distance_to_boundary(x), -s); });
  return MeasureData(std::move(mesh), base.masses_, {}, s >= 1.0 && scale > 0.0);
}

MeasureData MeasureData::atom(MeshPtr mesh, Point location, double mass) {
  const std::size_t n = mesh->num_nodes();
  return MeasureData(std::move(mesh), std::vector<double>(n, 0.0), {Atom{location, mass}});
}

bool MeasureData::is_zero() const {
  return std::all_of(masses_.begin(), masses_.end(), [](double m) { return m == 0.0; }) &&
         std::all_of(atoms_.begin(), atoms_.end(), [](const Atom& a) { return a.mass == 0.0; });
}

double MeasureData::total_mass() const {
  double s = std::accumulate(masses_.begin(), masses_.end(), 0.0);
  for (const auto& a : atoms_) s += a.mass;
  return s;
}

double MeasureData::mass_where(const std::function<bool(std::size_t)>& node_pred,
                               const std::function<bool(const Atom&)>& atom_pred) const {
  double s = 0.0;
  for (std::size_t i = 0; i < masses_.size(); ++i)
    if (masses_[i] != 0.0 && node_pred(i)) s += masses_[i];
  for (const auto& a : atoms_)
    if (a.mass != 0.0 && atom_pred(a)) s += a.mass;
  return s;
}

std::vector<double> MeasureData::load_vector() const {
  std::vector<double> b = masses_;
  for (const auto& a : atoms_) {
    const auto loc = mesh_->locate(a.location);
    if (!loc) throw Error("measure: atom outside domain");
    const auto idx = mesh_->cell(loc->cell);
    for (int k = 0; k < mesh_->nodes_per_cell(); ++k) b[idx[k]] += a.mass * loc->barycentric[k];
  }
  return b;
}

MeasureData MeasureData::scaled(double t) const {
  if (!(t >= 0.0)) throw Error("measure: scale factor must be >= 0");
  std::vector<double> m = masses_;
  for (double& v : m) v *= t;
  std::vector<Atom> at = atoms_;
  for (auto& a : at) a.mass *= t;
  return MeasureData(mesh_, std::move(m), std::move(at), infinite_total_ && t > 0.0);
}

MeasureData MeasureData::plus(const MeasureData& other) const {
  require_same_mesh(mesh_, other.mesh_, "measure sum");
  std::vector<double> m = masses_;
  for (std::size_t i = 0; i < m.size(); ++i) m[i] += other.masses_[i];
  std::vector<Atom> at = atoms_;
  at.insert(at.end(), other.atoms_.begin(), other.atoms_.end());
  return MeasureData(mesh_, std::move(m), std::move(at), infinite_total_ || other.infinite_total_);
}

MeasureData MeasureData::truncated(double r, double density_cap) const {
  std::vector<double> m(masses_.size(), 0.0);
  std::vector<double> vol;
  if (density_cap > 0.0) {
    vol.assign(masses_.size(), 0.0);
    const double share = 1.0 / mesh_->nodes_per_cell();
    for (std::size_t c = 0; c < mesh_->num_cells(); ++c)
      for (int node : mesh_->cell(c)) vol[node] += mesh_->volume(c) * share;
  }
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (mesh_->delta(i) >= r && mesh_->delta(i) > 0.0) {
      m[i] = masses_[i];
      if (density_cap > 0.0) m[i] = std::min(m[i], density_cap * vol[i]);
    }
  }
  std::vector<Atom> at;
  for (const auto& a : atoms_) {
    const double d = mesh_->geometry().distance_to_boundary(a.location);
    if (d >= r && d > 0.0) at.push_back(a);
  }
  return MeasureData(mesh_, std::move(m), std::move(at), false);
}

bool MeasureData::le(const MeasureData& other, double tol) const {
  require_same_mesh(mesh_, other.mesh_, "measure comparison");
  const auto a = load_vector();
  const auto b = other.load_vector();
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] > b[i] + tol) return false;
  return true;
}

MeasureData MeasureSpec::build(const MeshPtr& mesh) const {
  switch (kind) {
    case Kind::zero:
      return MeasureData::zero(mesh);
    case Kind::lebesgue:
      return MeasureData::lebesgue(mesh, scale);
    case Kind::power:
      return MeasureData::power_density(mesh, s, scale);
    case Kind::atoms: {
      std::vector<Atom> at = atoms;
      for (auto& a : at) a.mass *= scale;
      return MeasureData(mesh, std::vector<double>(mesh->num_nodes(), 0.0), std::move(at));
    }
  }
  throw Error("measure spec: unknown kind");
}

double weighted_p_energy(const DiscreteFunction& f, const Weight& w, double p) {
  require_same_mesh(f.mesh(), w.mesh(), "weighted_p_energy");
  if (!(p > 1.0)) throw Error("weighted_p_energy: p must exceed 1");
  const Mesh& m = *f.mesh();
  double s = 0.0;
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const Point z = f.gradient(c);
    const double g2 = dot(z, z);
    if (g2 == 0.0) continue;
    s += m.volume(c) * w.cell_value(c) * std::pow(g2, 0.5 * p);
  }
  return s;
}

double measure_pairing(const DiscreteFunction& f, const MeasureData& sigma) {
  require_same_mesh(f.mesh(), sigma.mesh(), "measure_pairing");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += sigma.mass(i) * f[i];
  for (const auto& a : sigma.atoms()) s += a.mass * f.value_at(a.location);
  return s;
}

double lq_norm(const DiscreteFunction& f, const MeasureData& sigma, double q) {
  require_same_mesh(f.mesh(), sigma.mesh(), "lq_norm");
  if (!(q > 0.0)) throw Error("lq_norm: q must be positive");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (sigma.mass(i) != 0.0 && f[i] != 0.0) s += sigma.mass(i) * std::pow(std::abs(f[i]), q);
  for (const auto& a : sigma.atoms()) {
    const double v = std::abs(f.value_at(a.location));
    if (a.mass != 0.0 && v != 0.0) s += a.mass * std::pow(v, q);
  }
  return std::pow(s, 1.0 / q);
}

double weak_lq_norm(const DiscreteFunction& f, const MeasureData& sigma, double q) {
  require_same_mesh(f.mesh(), sigma.mesh(), "weak_lq_norm");
  if (!(q > 0.0)) throw Error("weak_lq_norm: q must be positive");
  // (|f| value, mass) pairs sorted by decreasing value; the tail sum at each
  // distinct value is σ({|f| >= value}).
  std::vector<std::pair<double, double>> pts;
  pts.reserve(f.size() + sigma.atoms().size());
  for (std::size_t i = 0; i < f.size(); ++i)
    if (sigma.mass(i) > 0.0) pts.emplace_back(std::abs(f[i]), sigma.mass(i));
  for (const auto& a : sigma.atoms())
    if (a.mass > 0.0) pts.emplace_back(std::abs(f.value_at(a.location)), a.mass);
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  double best = 0.0, tail = 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    tail += pts[k].second;
    const bool last_of_level = k + 1 == pts.size() || pts[k + 1].first != pts[k].first;
    if (last_of_level && pts[k].first > 0.0) best = std::max(best, pts[k].first * std::pow(tail, 1.0 / q));
  }
  return best;
}

void write_function_csv(std::ostream& os, const DiscreteFunction& f) {
  const Mesh& m = *f.mesh();
  os << (m.dimension() == 1 ? "node,x,value\n" : "node,x,y,value\n");
  for (std::size_t i = 0; i < f.size(); ++i) {
    os << i << "," << format_number(m.node(i).x);
    if (m.dimension() == 2) os << "," << format_number(m.node(i).y);
    os << "," << format_number(f[i]) << "\n";
  }
}

void write_measure_csv(std::ostream& os, const MeasureData& sigma) {
  const Mesh& m = *sigma.mesh();
  os << "node,mass\n";
  for (std::size_t i = 0; i < sigma.masses().size(); ++i) os << i << "," << format_number(sigma.mass(i)) << "\n";
  os << (m.dimension() == 1 ? "atoms\nx,mass\n" : "atoms\nx,y,mass\n");
  for (const auto& a : sigma.atoms()) {
    os << format_number(a.location.x);
    if (m.dimension() == 2) os << "," << format_number(a.location.y);
    os << "," << format_number(a.mass) << "\n";
  }
}

}  // namespace plap
