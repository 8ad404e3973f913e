// Python view of the library: feeders, the linear model, both optimizers and
// the scenario runner. Matrices cross the boundary as lists of rows.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "gridbarrier/baselines.hpp"
#include "gridbarrier/controller.hpp"
#include "gridbarrier/experiment.hpp"
#include "gridbarrier/output.hpp"
#include "gridbarrier/scenario.hpp"

namespace py = pybind11;
namespace gb = gridbarrier;

namespace {

using Rows = std::vector<std::vector<double>>;

Rows to_rows(const gb::Matrix& m) {
  Rows out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i].assign(m.row(i).begin(), m.row(i).end());
  return out;
}

gb::Matrix from_rows(const Rows& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  gb::Matrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw gb::DimensionMismatch("ragged matrix rows");
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

py::dict method_dict(const gb::MethodResult& m) {
  py::dict d;
  d["id"] = m.id;
  d["method"] = m.method;
  d["estimate"] = m.estimate;
  d["status"] = m.status;
  d["message"] = m.message;
  d["final_max"] = m.final_max;
  d["cost"] = m.cost;
  d["steps_to_convergence"] = m.steps_to_convergence;
  d["violations"] = m.violations;
  d["u_final"] = m.u_final;
  std::vector<double> peak;
  for (const gb::StepRecord& r : m.trajectory.steps) peak.push_back(r.max_x);
  d["max_x"] = peak;
  return d;
}

py::dict experiment_dict(const gb::ExperimentResult& r) {
  py::dict d;
  d["name"] = r.scenario.name;
  d["x_bar"] = r.scenario.x_bar_pu();
  py::list estimates;
  for (const gb::EstimateReport& e : r.estimates) {
    py::dict ed;
    ed["name"] = e.name;
    ed["eps_b"] = e.eps_b;
    ed["relative_error"] = e.realized_error;
    estimates.append(ed);
  }
  d["estimates"] = estimates;
  py::list methods;
  for (const gb::MethodResult& m : r.methods) methods.append(method_dict(m));
  d["methods"] = methods;
  return d;
}

}  // namespace

PYBIND11_MODULE(_gridbarrier, m) {
  m.doc() = "Online exponential barrier voltage control on radial feeders";

  py::register_exception<gb::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<gb::ValidationFailure>(m, "ValidationFailure", PyExc_ValueError);

  py::class_<gb::RadialNetwork>(m, "Network")
      .def_readonly("n", &gb::RadialNetwork::n)
      .def_readwrite("v0_mag", &gb::RadialNetwork::v0_mag)
      .def_property_readonly("p_av", &gb::RadialNetwork::p_av)
      .def("to_csv", &gb::format_network_csv)
      .def("__repr__", [](const gb::RadialNetwork& n) { return "<Network n=" + std::to_string(n.n) + ">"; });

  m.def("synthetic_feeder", [](std::size_t n, std::uint64_t seed, double overload) {
        return gb::generate_synthetic_feeder(n, seed, overload);
      },
      py::arg("n"), py::arg("seed") = 1, py::arg("overload") = 1.0);
  m.def("read_network", &gb::read_network_csv, py::arg("path"));
  m.def("parse_network", [](const std::string& text) {
        std::istringstream in(text);
        return gb::parse_network_csv(in);
      },
      py::arg("text"));

  m.def("sensitivity", [](const gb::RadialNetwork& net) {
        const gb::SensitivityModel s = gb::build_sensitivity_model(net);
        py::dict d;
        d["r"] = to_rows(s.r);
        d["x"] = to_rows(s.x);
        d["b"] = to_rows(s.b);
        d["e"] = s.e;
        return d;
      },
      py::arg("network"));
  m.def("common_path_impedance", [](const gb::RadialNetwork& net) {
        const gb::Impedance z = gb::common_path_oracle(net);
        return py::make_tuple(to_rows(z.r), to_rows(z.x));
      },
      py::arg("network"));

  m.def("perturb", [](const Rows& b, const std::string& kind, double magnitude, std::uint64_t seed, int transpositions) {
        const gb::ModelEstimate e =
            gb::perturb_model(from_rows(b), gb::parse_perturbation_kind(kind), magnitude, seed, transpositions);
        py::dict d;
        d["b_hat"] = to_rows(e.b_hat);
        d["eps_b"] = e.eps_b;
        d["relative_error"] = e.relative_error;
        return d;
      },
      py::arg("b"), py::arg("kind") = "both", py::arg("magnitude") = 0.0, py::arg("seed") = 1,
      py::arg("transpositions") = 1);
  m.def("spectral_norm", [](const Rows& a) { return gb::spectral_norm(from_rows(a)); }, py::arg("m"));

  m.def("solve_lcqp", [](const std::vector<double>& q, const Rows& b, const std::vector<double>& e,
                         const std::vector<double>& x_bar, const std::vector<double>& lo,
                         const std::vector<double>& hi) {
        const gb::QpSolution s = gb::solve_lcqp(q, from_rows(b), e, x_bar, gb::InverterLimits{lo, hi});
        py::dict d;
        d["u"] = s.u_star;
        d["multipliers"] = s.multipliers;
        d["objective"] = s.objective;
        return d;
      },
      py::arg("q"), py::arg("b"), py::arg("e"), py::arg("x_bar"), py::arg("lo"), py::arg("hi"));

  m.def("run_barrier", [](const gb::RadialNetwork& net, const Rows& b_hat, double eps_b, double x_bar,
                          std::size_t max_iterations) {
        const gb::SensitivityModel model = gb::build_sensitivity_model(net);
        const gb::InverterLimits lim = gb::InverterLimits::from_network(net, 0.4, false);
        gb::BarrierConfig cfg = gb::BarrierConfig::uniform(net.n, 200, 0.6, 3, 1, x_bar);
        cfg.max_iterations = max_iterations;
        gb::ModelEstimate est{from_rows(b_hat), eps_b, 0.0};
        const gb::Trajectory t = gb::run_barrier(gb::Plant(model), est, cfg, lim);
        py::dict d;
        d["status"] = gb::to_string(t.status);
        d["u"] = t.final().u;
        d["x"] = t.final().x;
        d["steps"] = t.final().step;
        std::vector<double> peak;
        for (const gb::StepRecord& r : t.steps) peak.push_back(r.max_x);
        d["max_x"] = peak;
        return d;
      },
      py::arg("network"), py::arg("b_hat"), py::arg("eps_b") = 0.0, py::arg("x_bar") = 0.05,
      py::arg("max_iterations") = 20000);

  m.def("run_scenario", [](const std::string& path) { return experiment_dict(gb::run_experiment(gb::load_scenario(path))); },
        py::arg("path"));
  m.def("run_scenario_text", [](const std::string& text, const std::string& base_dir) {
        std::istringstream in(text);
        return experiment_dict(gb::run_experiment(gb::parse_scenario(in, base_dir)));
      },
      py::arg("text"), py::arg("base_dir") = ".");
}
