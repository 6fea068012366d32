#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "plap/config.hpp"
#include "plap/singular.hpp"
#include "plap/sweep.hpp"

namespace py = pybind11;
using namespace plap;

namespace {

py::array_t<double> as_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

py::dict report_dict(const SolveReport& r) {
  py::dict d;
  d["status"] = r.status();
  d["iterations"] = r.iterations;
  d["residual"] = r.residual;
  d["tolerance"] = r.tolerance;
  d["energy"] = r.energy;
  d["sup_norm"] = r.sup_norm;
  d["converged"] = r.converged;
  return d;
}

}  // namespace

PYBIND11_MODULE(_plap, m) {
  m.doc() = "Weighted p-Laplace solvers, potentials and trace-inequality checks";
  py::register_exception<Error>(m, "PlapError", PyExc_ValueError);

  py::class_<Point>(m, "Point")
      .def(py::init<double, double>(), py::arg("x"), py::arg("y") = 0.0)
      .def_readwrite("x", &Point::x)
      .def_readwrite("y", &Point::y)
      .def("__repr__", [](const Point& p) { return "Point(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")"; });

  py::class_<Mesh, std::shared_ptr<Mesh>>(m, "Mesh")
      .def_property_readonly("dimension", &Mesh::dimension)
      .def_property_readonly("num_nodes", &Mesh::num_nodes)
      .def_property_readonly("num_cells", &Mesh::num_cells)
      .def("nodes", [](const Mesh& mesh) {
        py::array_t<double> a({mesh.num_nodes(), static_cast<std::size_t>(mesh.dimension())});
        auto r = a.mutable_unchecked<2>();
        for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
          r(i, 0) = mesh.node(i).x;
          if (mesh.dimension() == 2) r(i, 1) = mesh.node(i).y;
        }
        return a;
      })
      .def("deltas", [](const Mesh& mesh) { return as_array(mesh.deltas()); })
      .def("boundary", [](const Mesh& mesh) {
        std::vector<bool> b(mesh.num_nodes());
        for (std::size_t i = 0; i < b.size(); ++i) b[i] = mesh.is_boundary(i);
        return b;
      })
      .def("measure", &Mesh::measure);

  // MeshPtr is shared_ptr<const Mesh>; the Python side holds a non-const one.
  auto to_ptr = [](const std::shared_ptr<Mesh>& p) -> MeshPtr { return p; };
  auto from_ptr = [](MeshPtr p) { return std::const_pointer_cast<Mesh>(p); };

  m.def("interval_mesh", [=](double a, double b, int n) { return from_ptr(build_interval_mesh(a, b, n)); },
        py::arg("a"), py::arg("b"), py::arg("cells"));
  m.def("polygon_mesh",
        [=](const std::vector<std::pair<double, double>>& poly, double h) {
          std::vector<Point> pts;
          for (auto [x, y] : poly) pts.push_back({x, y});
          return from_ptr(build_polygon_mesh(pts, h));
        },
        py::arg("polygon"), py::arg("h"));

  py::class_<Weight>(m, "Weight")
      .def(py::init([=](const std::shared_ptr<Mesh>& mesh, double t) { return power_weight(to_ptr(mesh), t); }),
           py::arg("mesh"), py::arg("t") = 0.0)
      .def_property_readonly("exponent", &Weight::exponent);

  py::class_<DiscreteFunction>(m, "DiscreteFunction")
      .def(py::init([=](const std::shared_ptr<Mesh>& mesh, std::vector<double> v, bool zero_trace) {
             return DiscreteFunction(to_ptr(mesh), std::move(v), zero_trace);
           }),
           py::arg("mesh"), py::arg("values"), py::arg("zero_trace") = true)
      .def_property_readonly("values", [](const DiscreteFunction& f) { return as_array(f.values()); })
      .def("__call__", [](const DiscreteFunction& f, double x, double y) { return f.value_at({x, y}); }, py::arg("x"),
           py::arg("y") = 0.0)
      .def("sup_norm", &DiscreteFunction::sup_norm)
      .def("__len__", &DiscreteFunction::size);

  py::class_<MeasureData>(m, "Measure")
      .def_static("zero", [=](const std::shared_ptr<Mesh>& mesh) { return MeasureData::zero(to_ptr(mesh)); })
      .def_static("lebesgue", [=](const std::shared_ptr<Mesh>& mesh, double scale) {
        return MeasureData::lebesgue(to_ptr(mesh), scale);
      }, py::arg("mesh"), py::arg("scale") = 1.0)
      .def_static("power_density", [=](const std::shared_ptr<Mesh>& mesh, double s, double scale) {
        return MeasureData::power_density(to_ptr(mesh), s, scale);
      }, py::arg("mesh"), py::arg("s"), py::arg("scale") = 1.0)
      .def_static("atom", [=](const std::shared_ptr<Mesh>& mesh, Point x, double mass) {
        return MeasureData::atom(to_ptr(mesh), x, mass);
      }, py::arg("mesh"), py::arg("location"), py::arg("mass") = 1.0)
      .def("scaled", &MeasureData::scaled)
      .def("__add__", &MeasureData::plus)
      .def("truncated", &MeasureData::truncated, py::arg("r"), py::arg("density_cap") = 0.0)
      .def("total_mass", &MeasureData::total_mass)
      .def_property_readonly("infinite_total", &MeasureData::infinite_total)
      .def_property_readonly("masses", [](const MeasureData& mu) { return as_array(mu.masses()); });

  py::class_<OperatorA>(m, "Operator")
      .def(py::init<double, std::vector<double>>(), py::arg("p"), py::arg("diagonal") = std::vector<double>{})
      .def_property_readonly("p", &OperatorA::p)
      .def_property_readonly("alpha", &OperatorA::alpha)
      .def_property_readonly("beta", &OperatorA::beta);

  py::class_<SolverOptions>(m, "SolverOptions")
      .def(py::init<>())
      .def_readwrite("tol", &SolverOptions::tol)
      .def_readwrite("max_iter", &SolverOptions::max_iter)
      .def_readwrite("blow_up_threshold", &SolverOptions::blow_up_threshold);

  m.def("solve",
        [](const Weight& w, const OperatorA& A, const MeasureData& mu, const SolverOptions& o) {
          auto s = solve(w, A, mu, o);
          return py::make_tuple(s.u, report_dict(s.report));
        },
        py::arg("weight"), py::arg("op"), py::arg("measure"), py::arg("options") = SolverOptions{});
  m.def("energy", &weighted_p_energy, py::arg("f"), py::arg("weight"), py::arg("p"));
  m.def("lq_norm", &lq_norm, py::arg("f"), py::arg("measure"), py::arg("q"));
  m.def("weak_lq_norm", &weak_lq_norm, py::arg("f"), py::arg("measure"), py::arg("q"));

  m.def("potential",
        [](const Weight& w, const OperatorA& A, const MeasureData& mu, double ratio, int k_max) {
          ExhaustionSchedule s;
          s.ratio = ratio;
          s.k_max = k_max;
          auto r = wa_potential(w, A, mu, s);
          std::vector<double> sups;
          for (const auto& st : r.stages) sups.push_back(st.sup);
          return py::make_tuple(r.u, to_string(r.verdict), sups);
        },
        py::arg("weight"), py::arg("op"), py::arg("measure"), py::arg("ratio") = 2.0, py::arg("k_max") = 12);
  m.def("wolff_potential", &wolff_potential, py::arg("measure"), py::arg("weight"), py::arg("x"), py::arg("R"),
        py::arg("p"));

  m.def("trace_constant",
        [](const Weight& w, const MeasureData& sigma, double p, double q, bool weak) {
          auto e = weak ? estimate_weak_trace_constant(w, sigma, p, q) : estimate_trace_constant(w, sigma, p, q);
          return py::make_tuple(e.C_hat, e.maximizer);
        },
        py::arg("weight"), py::arg("measure"), py::arg("p"), py::arg("q"), py::arg("weak") = false);
  m.def("capacity",
        [](const Weight& w, double p, const std::vector<bool>& K) {
          std::vector<char> mask(K.begin(), K.end());
          auto r = capacity(w, p, mask);
          return py::make_tuple(r.cap, r.minimizer);
        },
        py::arg("weight"), py::arg("p"), py::arg("K"));
  m.def("hardy",
        [](const Weight& w, double p) {
          auto r = hardy_check(w, p);
          py::dict d;
          d["constant"] = r.constant;
          d["oracle"] = r.has_oracle ? py::cast(r.oracle) : py::none();
          return d;
        },
        py::arg("weight"), py::arg("p"));

  py::class_<SingularNonlinearity>(m, "Nonlinearity")
      .def_static("decreasing", &SingularNonlinearity::power_decreasing, py::arg("gamma"))
      .def_static("sublinear", &SingularNonlinearity::power_sublinear, py::arg("q"))
      .def("h", &SingularNonlinearity::h)
      .def("g", &SingularNonlinearity::g, py::arg("u"), py::arg("p"))
      .def("__repr__", &SingularNonlinearity::describe);

  m.def("solve_singular",
        [](const Weight& w, const OperatorA& A, const MeasureData& sigma, const SingularNonlinearity& nl, int k_max) {
          SingularOptions o;
          o.k_max = k_max;
          auto s = solve_singular(w, A, sigma, nl, o);
          double margin = INFINITY;
          for (const auto& st : s.report.stages) margin = std::min(margin, st.barrier_margin);
          py::dict d;
          d["verdict"] = to_string(s.report.verdict);
          d["omega"] = s.report.omega;
          d["barrier_margin"] = margin;
          d["monotonicity_violations"] = s.report.monotonicity_violations;
          return py::make_tuple(s.u, d);
        },
        py::arg("weight"), py::arg("op"), py::arg("measure"), py::arg("nonlinearity"), py::arg("k_max") = 40);

  m.def("verify_energy_sandwich",
        [](const Weight& w, const OperatorA& A, const MeasureData& sigma, double q, double slack) {
          auto r = verify_energy_sandwich(w, A, sigma, q, slack);
          py::dict d;
          d["C_hat"] = r.C_hat;
          d["E"] = r.E;
          d["M"] = r.M;
          d["lower_E"] = r.lower_E;
          d["upper_E"] = r.upper_E;
          d["lower_M"] = r.lower_M;
          d["upper_M"] = r.upper_M;
          d["passed"] = r.passed;
          return d;
        },
        py::arg("weight"), py::arg("op"), py::arg("measure"), py::arg("q"), py::arg("slack") = 0.02);

  m.def("run_sweep",
        [](const std::string& config_text, int workers) {
          auto cfg = ScenarioConfig::from_ini(IniFile::parse(config_text));
          std::ostringstream os;
          write_sweep_csv(os, run_sweep(cfg, cfg.levels, workers));
          return os.str();
        },
        py::arg("config_text"), py::arg("workers") = 1);
}
