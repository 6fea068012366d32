#include "plap/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace plap {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

double to_double(const std::string& text, const std::string& field) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw ConfigError(field + ": '" + text + "' is not a number");
  }
  if (pos != text.size()) throw ConfigError(field + ": '" + text + "' is not a number");
  return v;
}

std::string field(const std::string& section, const std::string& key) { return "[" + section + "] " + key; }

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::vector<double> tokens(const std::string& group, const std::string& f) {
  std::vector<double> v;
  std::istringstream is(group);
  std::string tok;
  while (is >> tok) v.push_back(to_double(tok, f));
  return v;
}

}  // namespace

IniFile IniFile::parse(const std::string& text) {
  IniFile ini;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto c = line.find_first_of("#;");
    // ';' also separates atom groups, so only a leading ';' is a comment
    if (c != std::string::npos && (line[c] == '#' || trim(line.substr(0, c)).empty())) line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": key outside of a section");
    const std::string key = trim(line.substr(0, eq));
    if (ini.values_[section].count(key)) throw ConfigError(field(section, key) + ": duplicate key");
    ini.values_[section][key] = trim(line.substr(eq + 1));
  }
  return ini;
}

IniFile IniFile::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return parse(os.str());
}

bool IniFile::has(const std::string& section, const std::string& key) const {
  auto s = values_.find(section);
  return s != values_.end() && s->second.count(key);
}

std::string IniFile::get(const std::string& section, const std::string& key, const std::string& fallback) const {
  used_[section][key] = true;
  auto s = values_.find(section);
  if (s == values_.end()) return fallback;
  auto k = s->second.find(key);
  return k == s->second.end() ? fallback : k->second;
}

double IniFile::get_double(const std::string& section, const std::string& key, double fallback) const {
  if (!has(section, key)) {
    used_[section][key] = true;
    return fallback;
  }
  return to_double(get(section, key, ""), field(section, key));
}

int IniFile::get_int(const std::string& section, const std::string& key, int fallback) const {
  const double v = get_double(section, key, fallback);
  if (v != static_cast<int>(v)) throw ConfigError(field(section, key) + ": expected an integer");
  return static_cast<int>(v);
}

bool IniFile::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const std::string v = get(section, key, fallback ? "true" : "false");
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  throw ConfigError(field(section, key) + ": expected true or false");
}

std::vector<double> IniFile::get_list(const std::string& section, const std::string& key,
                                      const std::vector<double>& fallback) const {
  if (!has(section, key)) {
    used_[section][key] = true;
    return fallback;
  }
  const std::string v = get(section, key, "");
  std::vector<double> out;
  if (v.empty()) return out;
  for (const auto& item : split(v, ',')) out.push_back(to_double(item, field(section, key)));
  return out;
}

std::vector<std::string> IniFile::unused() const {
  std::vector<std::string> out;
  for (const auto& [s, kv] : values_)
    for (const auto& [k, v] : kv) {
      auto su = used_.find(s);
      if (su == used_.end() || !su->second.count(k)) out.push_back(field(s, k));
    }
  return out;
}

std::string to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::measure_data: return "measure_data";
    case ProblemKind::singular: return "singular";
    case ProblemKind::trace: return "trace";
    case ProblemKind::capacity: return "capacity";
    case ProblemKind::wolff: return "wolff";
  }
  return "?";
}

ScenarioConfig ScenarioConfig::from_ini(const IniFile& ini) {
  ScenarioConfig c;
  c.shape = ini.get("domain", "shape", c.shape);
  c.a = ini.get_double("domain", "a", c.a);
  c.b = ini.get_double("domain", "b", c.b);
  c.cells = ini.get_int("domain", "cells", c.cells);
  c.width = ini.get_double("domain", "width", c.width);
  c.height = ini.get_double("domain", "height", c.height);
  c.h = ini.get_double("domain", "h", c.h);

  c.t = ini.get_double("weight", "t", c.t);

  const std::string mk = ini.get("measure", "kind", "lebesgue");
  if (mk == "lebesgue") c.measure.kind = MeasureSpec::Kind::lebesgue;
  else if (mk == "power") c.measure.kind = MeasureSpec::Kind::power;
  else if (mk == "atoms") c.measure.kind = MeasureSpec::Kind::atoms;
  else if (mk == "zero") c.measure.kind = MeasureSpec::Kind::zero;
  else throw ConfigError("[measure] kind: expected lebesgue, power, atoms or zero, got '" + mk + "'");
  c.measure.scale = ini.get_double("measure", "scale", 1.0);
  c.measure.s = ini.get_double("measure", "s", 1.0);
  const bool two_d = c.shape != "interval";
  for (const auto& group : split(ini.get("measure", "atoms", ""), ';')) {
    if (group.empty()) continue;
    const auto v = tokens(group, "[measure] atoms");
    if (v.size() != (two_d ? 3u : 2u))
      throw ConfigError(std::string("[measure] atoms: each atom is '") + (two_d ? "x y mass" : "x mass") + "'");
    c.measure.atoms.push_back(two_d ? Atom{{v[0], v[1]}, v[2]} : Atom{{v[0], 0.0}, v[1]});
  }
  if (c.measure.kind == MeasureSpec::Kind::atoms && c.measure.atoms.empty())
    throw ConfigError("[measure] atoms: kind = atoms needs at least one atom");

  c.p = ini.get_double("operator", "p", c.p);
  c.diagonal = ini.get_list("operator", "diagonal", {});

  const std::string pk = ini.get("problem", "kind", "measure_data");
  if (pk == "measure_data") c.problem = ProblemKind::measure_data;
  else if (pk == "singular") c.problem = ProblemKind::singular;
  else if (pk == "trace") c.problem = ProblemKind::trace;
  else if (pk == "capacity") c.problem = ProblemKind::capacity;
  else if (pk == "wolff") c.problem = ProblemKind::wolff;
  else throw ConfigError("[problem] kind: expected measure_data, singular, trace, capacity or wolff, got '" + pk + "'");
  c.q = ini.get_double("problem", "q", c.q);
  c.weak = ini.get_bool("problem", "weak", c.weak);
  c.nonlinearity = ini.get("problem", "nonlinearity", c.nonlinearity);
  c.gamma = ini.get_double("problem", "gamma", c.gamma);
  c.set = ini.get_list("problem", "set", {});
  c.radius = ini.get_double("problem", "radius", c.radius);
  for (const auto& group : split(ini.get("problem", "points", ""), ';')) {
    if (group.empty()) continue;
    const auto v = tokens(group, "[problem] points");
    if (v.size() != (two_d ? 2u : 1u)) throw ConfigError("[problem] points: each point is 'x' in 1D or 'x y' in 2D");
    c.points.push_back(two_d ? Point{v[0], v[1]} : Point{v[0], 0.0});
  }
  for (const auto& name : split(ini.get("problem", "checks", ""), ','))
    if (!name.empty()) c.checks.push_back(name);
  c.slack = ini.get_double("problem", "slack", c.slack);
  c.window_tol = ini.get_double("problem", "window_tol", c.window_tol);

  auto& so = c.solver;
  so.tol = ini.get_double("solver", "tol", so.tol);
  so.max_iter = ini.get_int("solver", "max_iter", so.max_iter);
  so.eps0 = ini.get_double("solver", "eps0", so.eps0);
  so.eps_min = ini.get_double("solver", "eps_min", so.eps_min);
  so.eps_factor = ini.get_double("solver", "eps_factor", so.eps_factor);
  so.blow_up_threshold = ini.get_double("solver", "blow_up_threshold", so.blow_up_threshold);

  auto& ex = c.exhaustion;
  ex.r0 = ini.get_double("exhaustion", "r0", ex.r0);
  ex.ratio = ini.get_double("exhaustion", "ratio", ex.ratio);
  ex.k_max = ini.get_int("exhaustion", "k_max", ex.k_max);
  ex.density_cap0 = ini.get_double("exhaustion", "density_cap0", ex.density_cap0);
  ex.k_min = ini.get_int("exhaustion", "k_min", ex.k_min);
  ex.cauchy_tol = ini.get_double("exhaustion", "cauchy_tol", ex.cauchy_tol);
  ex.cauchy_stages = ini.get_int("exhaustion", "cauchy_stages", ex.cauchy_stages);
  ex.growth_factor = ini.get_double("exhaustion", "growth_factor", ex.growth_factor);
  ex.growth_stages = ini.get_int("exhaustion", "growth_stages", ex.growth_stages);

  auto& sg = c.singular;
  sg.k_max = ini.get_int("singular", "k_max", 40);
  sg.inner_max = ini.get_int("singular", "inner_max", sg.inner_max);
  sg.inner_tol = ini.get_double("singular", "inner_tol", sg.inner_tol);
  sg.omega = ini.get_double("singular", "omega", sg.omega);
  const std::string shift = ini.get("singular", "shift", "dyadic");
  if (shift == "dyadic") sg.shift_kind = SingularOptions::Shift::dyadic;
  else if (shift == "harmonic") sg.shift_kind = SingularOptions::Shift::harmonic;
  else throw ConfigError("[singular] shift: expected dyadic or harmonic");
  sg.solver = so;
  sg.exhaustion = ex;

  auto& tr = c.trace;
  tr.max_iter = ini.get_int("trace", "max_iter", tr.max_iter);
  tr.rel_tol = ini.get_double("trace", "rel_tol", tr.rel_tol);
  tr.max_levels = ini.get_int("trace", "max_levels", tr.max_levels);
  tr.solver = so;

  c.sweep_p = ini.get_list("sweep", "p", {c.p});
  c.sweep_q = ini.get_list("sweep", "q", {c.q});
  c.sweep_t = ini.get_list("sweep", "t", {c.t});
  c.sweep_s = ini.get_list("sweep", "s", {c.measure.s});
  c.levels = ini.get_int("sweep", "levels", c.levels);
  c.workers = ini.get_int("sweep", "workers", c.workers);
  c.drift_tol = ini.get_double("sweep", "drift_tol", c.drift_tol);

  c.out_dir = ini.get("output", "dir", c.out_dir);
  c.plot = ini.get_bool("output", "plot", c.plot);

  const auto extra = ini.unused();
  if (!extra.empty()) throw ConfigError(extra.front() + ": unknown key");
  c.validate();
  return c;
}

ScenarioConfig ScenarioConfig::load(const std::string& path) { return from_ini(IniFile::load(path)); }

namespace {

void check_exponents(double p, double t, double q, const std::string& where) {
  if (!(t > -1.0 && t < p - 1.0))
    throw ConfigError(where + "t = " + num(t) + " violates -1 < t < p - 1 (p = " + num(p) + ")");
  if (!(q > 0.0 && q < p)) throw ConfigError(where + "q = " + num(q) + " violates 0 < q < p (p = " + num(p) + ")");
}

}  // namespace

void ScenarioConfig::validate() const {
  if (shape == "interval") {
    if (!(a < b)) throw ConfigError("[domain] a, b: need a < b");
    if (cells < 1) throw ConfigError("[domain] cells: need at least one cell");
  } else if (shape == "rectangle" || shape == "lshape") {
    if (!(h > 0.0)) throw ConfigError("[domain] h: need h > 0");
    if (!(width > 0.0 && height > 0.0)) throw ConfigError("[domain] width, height: need positive sizes");
  } else {
    throw ConfigError("[domain] shape: expected interval, rectangle or lshape, got '" + shape + "'");
  }
  if (!(p > 1.0)) throw ConfigError("[operator] p = " + num(p) + " violates p > 1");
  if (!diagonal.empty()) {
    if (diagonal.size() != (shape == "interval" ? 1u : 2u))
      throw ConfigError("[operator] diagonal: need one entry per space dimension");
    for (double d : diagonal)
      if (!(d > 0.0)) throw ConfigError("[operator] diagonal: entries must be positive");
  }
  if (!(t > -1.0 && t < p - 1.0))
    throw ConfigError("[weight] t = " + num(t) + " violates -1 < t < p - 1 (p = " + num(p) + ")");
  if (!(q > 0.0 && q < p)) throw ConfigError("[problem] q = " + num(q) + " violates 0 < q < p (p = " + num(p) + ")");
  if (measure.kind == MeasureSpec::Kind::power && !(measure.s >= 1.0))
    throw ConfigError("[measure] s = " + num(measure.s) + " violates 1 <= s");
  if (!(measure.scale >= 0.0)) throw ConfigError("[measure] scale: must be nonnegative");
  for (const auto& at : measure.atoms)
    if (!(at.mass >= 0.0)) throw ConfigError("[measure] atoms: masses must be nonnegative");
  if (problem == ProblemKind::singular) {
    if (nonlinearity == "decreasing") {
      if (!(gamma > 0.0)) throw ConfigError("[problem] gamma = " + num(gamma) + " violates gamma > 0");
    } else if (nonlinearity == "sublinear") {
      if (!(q > 0.0 && q < 1.0)) throw ConfigError("[problem] q = " + num(q) + " violates 0 < q < 1 for a sublinear nonlinearity");
    } else {
      throw ConfigError("[problem] nonlinearity: expected decreasing or sublinear");
    }
  }
  if (problem == ProblemKind::capacity && set.size() != (shape == "interval" ? 2u : 4u))
    throw ConfigError("[problem] set: need 'a, b' in 1D or 'x0, y0, x1, y1' in 2D");
  if (problem == ProblemKind::wolff && !(radius > 0.0)) throw ConfigError("[problem] radius: need R > 0");
  if (!(solver.tol > 0.0) || solver.max_iter < 1) throw ConfigError("[solver] tol, max_iter: must be positive");
  if (!(solver.eps_factor > 0.0 && solver.eps_factor < 1.0)) throw ConfigError("[solver] eps_factor: must lie in (0, 1)");
  try {
    exhaustion.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("[exhaustion] ") + e.what());
  }
  if (singular.k_max < 1 || singular.inner_max < 1) throw ConfigError("[singular] k_max, inner_max: must be >= 1");
  if (!(singular.omega > 0.0 && singular.omega <= 1.0)) throw ConfigError("[singular] omega: must lie in (0, 1]");
  if (levels < 1) throw ConfigError("[sweep] levels: need at least one level");
  if (workers < 1) throw ConfigError("[sweep] workers: need at least one worker");
  for (double pp : sweep_p) {
    if (!(pp > 1.0)) throw ConfigError("[sweep] p = " + num(pp) + " violates p > 1");
    for (double tt : sweep_t)
      for (double qq : sweep_q) check_exponents(pp, tt, qq, "[sweep] ");
  }
  for (double ss : sweep_s)
    if (!(ss >= 1.0)) throw ConfigError("[sweep] s = " + num(ss) + " violates 1 <= s");
}

MeshPtr ScenarioConfig::mesh(int level) const {
  if (shape == "interval") return build_interval_mesh(a, b, cells << level);
  const double hh = std::ldexp(h, -level);
  if (shape == "rectangle") return build_polygon_mesh({{0, 0}, {width, 0}, {width, height}, {0, height}}, hh);
  // L-shape: the rectangle minus its upper right quarter
  const double w2 = width / 2, h2 = height / 2;
  return build_polygon_mesh({{0, 0}, {width, 0}, {width, h2}, {w2, h2}, {w2, height}, {0, height}}, hh);
}

double ScenarioConfig::mesh_size(int level) const {
  return shape == "interval" ? (b - a) / (static_cast<double>(cells) * std::ldexp(1.0, level)) : std::ldexp(h, -level);
}

OperatorA ScenarioConfig::op() const { return OperatorA(p, diagonal); }

SingularNonlinearity ScenarioConfig::singular_nonlinearity() const {
  return nonlinearity == "sublinear" ? SingularNonlinearity::power_sublinear(q)
                                     : SingularNonlinearity::power_decreasing(gamma);
}

}  // namespace plap
