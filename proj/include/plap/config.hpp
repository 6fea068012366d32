#pragma once

#include <map>
#include <string>
#include <vector>

#include "plap/singular.hpp"

namespace plap {

/// Raised for unreadable or schema-violating configuration; the message names
/// the offending field.
struct ConfigError : Error {
  using Error::Error;
};

/// Line-oriented `key = value` text with `[section]` headers. `#` and `;`
/// start comments. Keys outside any section are rejected.
class IniFile {
 public:
  static IniFile parse(const std::string& text);
  static IniFile load(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  /// Comma-separated numbers; missing key gives `fallback`, an empty value an empty list.
  std::vector<double> get_list(const std::string& section, const std::string& key,
                               const std::vector<double>& fallback) const;

  /// Keys that no getter has asked for, as "[section] key".
  std::vector<std::string> unused() const;

 private:
  std::map<std::string, std::map<std::string, std::string>> values_;
  mutable std::map<std::string, std::map<std::string, bool>> used_;
};

enum class ProblemKind { measure_data, singular, trace, capacity, wolff };

struct ScenarioConfig {
  // [domain]
  std::string shape = "interval";  // interval | rectangle | lshape
  double a = 0.0, b = 1.0;         // interval ends
  int cells = 256;                 // interval cells
  double width = 1.0, height = 1.0;
  double h = 0.0625;  // 2D mesh size
  // [weight]
  double t = 0.0;
  // [measure]
  MeasureSpec measure;
  // [operator]
  double p = 2.0;
  std::vector<double> diagonal;  // empty: isotropic
  // [problem]
  ProblemKind problem = ProblemKind::measure_data;
  double q = 1.0;
  bool weak = false;
  std::string nonlinearity = "decreasing";  // decreasing (gamma) | sublinear (q)
  double gamma = 1.0;
  std::vector<double> set;  // capacity set: a,b or x0,y0,x1,y1
  double radius = 0.0;      // Wolff radius R
  std::vector<Point> points;
  std::vector<std::string> checks;  // verify subcommand
  double slack = 0.05;
  double window_tol = 1e-3;  // finite-mass window check
  // [solver] [exhaustion] [singular] [trace]
  SolverOptions solver;
  ExhaustionSchedule exhaustion;
  SingularOptions singular;
  TraceOptions trace;
  // [sweep]
  std::vector<double> sweep_p, sweep_q, sweep_t, sweep_s;
  int levels = 1;
  int workers = 1;
  double drift_tol = 0.05;
  // [output]
  std::string out_dir = "out";
  bool plot = false;

  static ScenarioConfig from_ini(const IniFile& ini);
  static ScenarioConfig load(const std::string& path);

  /// Throws ConfigError naming the violated constraint.
  void validate() const;

  /// Mesh at refinement level `level` (h halved per level).
  MeshPtr mesh(int level = 0) const;
  /// Nominal mesh size at that level.
  double mesh_size(int level = 0) const;
  OperatorA op() const;
  SingularNonlinearity singular_nonlinearity() const;
};

std::string to_string(ProblemKind k);

}  // namespace plap
