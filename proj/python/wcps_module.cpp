#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "wcps/control.hpp"
#include "wcps/engine.hpp"
#include "wcps/errors.hpp"
#include "wcps/gateway/wire.hpp"
#include "wcps/network.hpp"
#include "wcps/stability.hpp"

namespace py = pybind11;
using namespace wcps;

namespace {

SimConfig config_from(const std::string& text) {
  return text.empty() ? default_config() : config_from_json(nlohmann::json::parse(text));
}

class PySimulator {
 public:
  explicit PySimulator(const std::string& config) : sim_(config_from(config)) {}

  std::string step() {
    sim_.step_round();
    return wire::encode_state(sim_).dump();
  }
  std::string events() const {
    nlohmann::json out = nlohmann::json::array();
    if (sim_.last_round()) {
      for (const auto& e : sim_.last_round()->events) out.push_back(to_json(e));
    }
    return out.dump();
  }
  void submit(const std::string& command) { sim_.submit(command_from_json(nlohmann::json::parse(command))); }
  std::string state() const { return wire::encode_state(sim_).dump(); }
  std::string modes() const { return mode_catalog_json(sim_.design()).dump(); }
  long round() const { return sim_.round(); }

 private:
  Simulator sim_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Wireless cyber-physical system simulator core";

  py::register_exception<Error>(m, "Error");
  py::register_exception<CertificationError>(m, "CertificationError", m.attr("Error"));
  py::register_exception<ConfigError>(m, "ConfigError", m.attr("Error"));
  py::register_exception<NoSolutionError>(m, "NoSolutionError", m.attr("Error"));
  py::register_exception<NumericalError>(m, "NumericalError", m.attr("Error"));
  py::register_exception<ParameterError>(m, "ParameterError", m.attr("Error"));

  m.def("default_config", [] { return to_json(default_config()).dump(); });

  m.def("certify", [](const std::string& config) {
    return mode_catalog_json(design_controllers(config_from(config))).dump();
  }, py::arg("config") = "");

  m.def("run", [](const std::string& config) {
    const SimConfig c = config_from(config);
    const RunResult r = run(c);
    std::ostringstream csv;
    export_metrics(r.trace, c.pendulums.size(), static_cast<std::size_t>(generator_node_count(c.topology)), csv);
    return py::make_tuple(to_json(r.metrics).dump(), r.manifest.dump(), csv.str());
  }, py::arg("config") = "");

  m.def("solve_dare", [](const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                         const Eigen::MatrixXd& R) { return solve_dare(A, B, Q, R); });
  m.def("dare_residual", &dare_residual);
  m.def("lqr_gain", [](const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& R,
                       const Eigen::MatrixXd& P) { return lqr_gain(A, B, R, P).K; });
  m.def("solve_discrete_lyapunov", &solve_discrete_lyapunov);
  m.def("spectral_radius", &spectral_radius);

  m.def("cartpole_model", [](double sample_time, double cart_mass, double pole_mass, double length, double gravity) {
    PendulumParams p;
    p.cart_mass = cart_mass;
    p.pole_mass = pole_mass;
    p.pole_com_length = length;
    p.gravity = gravity;
    const auto d = discretize_zoh(linearize_cartpole(p), sample_time);
    return py::make_tuple(d.A, d.B);
  }, py::arg("sample_time") = 0.05, py::arg("cart_mass") = 0.5, py::arg("pole_mass") = 0.2,
     py::arg("length") = 0.3, py::arg("gravity") = 9.81);

  m.def("line_flood_reception", [](int nodes, double p, int n_tx, int floods, std::uint64_t seed) {
    Topology t(nodes);
    for (int i = 0; i + 1 < nodes; ++i) t.set_link(i, i + 1, p);
    FloodConfig cfg;
    cfg.n_tx = n_tx;
    cfg.slots_per_flood = default_slot_budget(t, n_tx);
    Rng rng(seed);
    std::vector<double> rate(static_cast<std::size_t>(nodes), 0.0);
    for (int k = 0; k < floods; ++k) {
      const auto out = simulate_flood(t, 0, cfg, rng);
      for (int j = 0; j < nodes; ++j) rate[static_cast<std::size_t>(j)] += out.received[static_cast<std::size_t>(j)];
    }
    for (auto& r : rate) r /= floods;
    return rate;
  }, py::arg("nodes"), py::arg("p"), py::arg("n_tx") = 3, py::arg("floods") = 10000, py::arg("seed") = 1);

  py::class_<PySimulator>(m, "Simulator")
      .def(py::init<const std::string&>(), py::arg("config") = "")
      .def("step", &PySimulator::step)
      .def("events", &PySimulator::events)
      .def("submit", &PySimulator::submit)
      .def("state", &PySimulator::state)
      .def("modes", &PySimulator::modes)
      .def_property_readonly("round", &PySimulator::round);
}
