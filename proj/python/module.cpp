#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gridmarket/case_io.hpp"
#include "gridmarket/certificates.hpp"
#include "gridmarket/coupled_dynamics.hpp"
#include "gridmarket/hybrid_sim.hpp"

namespace py = pybind11;
using namespace gridmarket;

PYBIND11_MODULE(_gridmarket, m) {
  m.doc() = "Coupled electricity-market / power-network simulation core";

  // ---- model data ----------------------------------------------------------
  py::class_<PowerNetwork>(m, "PowerNetwork")
      .def_readonly("n", &PowerNetwork::n)
      .def_readonly("m", &PowerNetwork::m)
      .def_readonly("M", &PowerNetwork::M)
      .def_readonly("A", &PowerNetwork::A)
      .def_readonly("V", &PowerNetwork::V)
      .def_readonly("Pd", &PowerNetwork::Pd)
      .def_readonly("gamma", &PowerNetwork::gamma)
      .def_readonly("D", &PowerNetwork::D);

  py::class_<TreeCoordinates>(m, "TreeCoordinates")
      .def_readonly("Dt", &TreeCoordinates::Dt)
      .def_readonly("Dt_pinv", &TreeCoordinates::Dt_pinv)
      .def_readonly("E", &TreeCoordinates::E)
      .def_readonly("tree_edges", &TreeCoordinates::tree_edges);

  py::class_<CostModel>(m, "CostModel")
      .def(py::init<>())
      .def_readwrite("q", &CostModel::q)
      .def_readwrite("c", &CostModel::c);

  py::class_<GainSet>(m, "GainSet")
      .def(py::init<>())
      .def_readwrite("tau_b", &GainSet::tau_b)
      .def_readwrite("tau_g", &GainSet::tau_g)
      .def_readwrite("tau_lambda", &GainSet::tau_lambda)
      .def_readwrite("rho", &GainSet::rho)
      .def_readwrite("sigma", &GainSet::sigma);

  py::class_<CaseData>(m, "CaseData")
      .def_readonly("network", &CaseData::network)
      .def_readonly("cost", &CaseData::cost)
      .def_readonly("gains", &CaseData::gains);

  py::class_<SystemState>(m, "SystemState")
      .def(py::init<>())
      .def_readwrite("phi", &SystemState::phi)
      .def_readwrite("omega", &SystemState::omega)
      .def_readwrite("b", &SystemState::b)
      .def_readwrite("Pg", &SystemState::Pg)
      .def_readwrite("lam", &SystemState::lambda)
      .def("pack", &SystemState::pack)
      .def_static("unpack", &SystemState::unpack, py::arg("x"), py::arg("n"));

  py::class_<ScenarioAction> action(m, "ScenarioAction");
  py::enum_<ScenarioAction::Kind>(action, "Kind")
      .value("ScaleAllLoads", ScenarioAction::Kind::ScaleAllLoads)
      .value("SetLoad", ScenarioAction::Kind::SetLoad)
      .value("SetCost", ScenarioAction::Kind::SetCost);
  action.def(py::init<>())
      .def_readwrite("kind", &ScenarioAction::kind)
      .def_readwrite("factor", &ScenarioAction::factor)
      .def_readwrite("bus", &ScenarioAction::bus)
      .def_readwrite("Pd", &ScenarioAction::Pd)
      .def_readwrite("q", &ScenarioAction::q)
      .def_readwrite("c", &ScenarioAction::c);
  py::class_<ScenarioEvent>(m, "ScenarioEvent")
      .def(py::init<>())
      .def_readwrite("t", &ScenarioEvent::t)
      .def_readwrite("actions", &ScenarioEvent::actions);

  py::class_<BusRecord>(m, "BusRecord")
      .def(py::init<>())
      .def_readwrite("id", &BusRecord::id)
      .def_readwrite("M", &BusRecord::M)
      .def_readwrite("A", &BusRecord::A)
      .def_readwrite("V", &BusRecord::V)
      .def_readwrite("Pd", &BusRecord::Pd);
  py::class_<EdgeRecord>(m, "EdgeRecord")
      .def(py::init<>())
      .def_readwrite("from_bus", &EdgeRecord::from)
      .def_readwrite("to_bus", &EdgeRecord::to)
      .def_readwrite("B", &EdgeRecord::B);
  m.def("build_network", &build_network, py::arg("buses"), py::arg("edges"));

  // ---- I/O -----------------------------------------------------------------
  m.def("load_case", &load_case, py::arg("path"));
  m.def("parse_case", &parse_case, py::arg("text"), py::arg("origin") = "<string>");
  m.def("serialize_case", &serialize_case, py::arg("data"));
  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("parse_scenario", &parse_scenario, py::arg("text"),
        py::arg("origin") = "<string>");
  m.def("trajectory_csv", &trajectory_csv, py::arg("trajectory"));
  m.def("events_csv", &events_csv, py::arg("trajectory"));

  // ---- network / market ----------------------------------------------------
  m.def("select_spanning_tree", &select_spanning_tree, py::arg("network"),
        py::arg("root") = 1);
  m.def("potential_energy", &potential_energy, py::arg("network"), py::arg("tree"),
        py::arg("phi"));

  py::class_<DispatchSolution>(m, "DispatchSolution")
      .def_readonly("Pg_star", &DispatchSolution::Pg_star)
      .def_readonly("lambda_star", &DispatchSolution::lambda_star)
      .def_readonly("b_star", &DispatchSolution::b_star);
  m.def("solve_economic_dispatch", &solve_economic_dispatch, py::arg("cost"),
        py::arg("Pd"));
  m.def("total_cost", &total_cost, py::arg("cost"), py::arg("Pg"));
  m.def("efficient_nash_equilibrium", &efficient_nash_equilibrium, py::arg("cost"),
        py::arg("Pd"));

  // ---- dynamics ------------------------------------------------------------
  m.def(
      "vector_field",
      [](const PowerNetwork& net, const TreeCoordinates& tree, const CostModel& cost,
         const GainSet& gains, const SystemState& x) {
        return vector_field(net, tree, cost, gains, x).pack();
      },
      py::arg("network"), py::arg("tree"), py::arg("cost"), py::arg("gains"),
      py::arg("x"));
  m.def("find_equilibrium", &find_equilibrium, py::arg("network"), py::arg("tree"),
        py::arg("cost"), py::arg("gains"));
  m.def("energy_function_V", &energy_function_V, py::arg("network"), py::arg("tree"),
        py::arg("gains"), py::arg("x"), py::arg("xbar"));

  // ---- certificates --------------------------------------------------------
  py::class_<EpsilonParameters>(m, "EpsilonParameters")
      .def_readonly("eps0", &EpsilonParameters::eps0)
      .def_readonly("eps1", &EpsilonParameters::eps1)
      .def_readonly("eps2", &EpsilonParameters::eps2)
      .def_readonly("eps3", &EpsilonParameters::eps3);

  py::class_<LyapunovCertificate>(m, "LyapunovCertificate")
      .def_readonly("eps", &LyapunovCertificate::eps)
      .def_readonly("gamma", &LyapunovCertificate::gamma)
      .def_readonly("c1", &LyapunovCertificate::c1)
      .def_readonly("c2", &LyapunovCertificate::c2)
      .def_readonly("alpha_hat", &LyapunovCertificate::alpha_hat)
      .def_readonly("chi", &LyapunovCertificate::chi)
      .def_readonly("alpha", &LyapunovCertificate::alpha)
      .def_readonly("xi_matrix_min_eig", &LyapunovCertificate::xi_matrix_min_eig);

  py::class_<LipschitzConstants>(m, "LipschitzConstants")
      .def_readonly("L_f", &LipschitzConstants::L_f)
      .def_readonly("L_g", &LipschitzConstants::L_g)
      .def_readonly("L_h", &LipschitzConstants::L_h)
      .def_readonly("L", &LipschitzConstants::L)
      .def_readonly("L_W", &LipschitzConstants::L_W);

  py::class_<StepBounds>(m, "StepBounds")
      .def_readonly("xi_bar", &StepBounds::xi_bar)
      .def_readonly("zeta_bar", &StepBounds::zeta_bar);

  m.def(
      "default_region",
      [](const PowerNetwork& net, const TreeCoordinates& tree, const SystemState& xbar) {
        return default_region(net, tree, xbar).gamma;
      },
      py::arg("network"), py::arg("tree"), py::arg("xbar"));
  m.def("w_epsilon", &w_epsilon, py::arg("x"), py::arg("xbar"), py::arg("eps"),
        py::arg("gains"), py::arg("network"), py::arg("tree"));
  m.def("find_epsilon", &find_epsilon, py::arg("network"), py::arg("tree"),
        py::arg("cost"), py::arg("gains"), py::arg("gamma"));
  m.def("lipschitz_constants", &lipschitz_constants, py::arg("network"), py::arg("tree"),
        py::arg("cost"), py::arg("gains"), py::arg("certificate"));
  m.def("step_bounds", &step_bounds, py::arg("constants"), py::arg("alpha"),
        py::arg("beta"));
  m.def("certificate_report", &certificate_report, py::arg("certificate"),
        py::arg("constants"), py::arg("bounds"));

  // ---- hybrid simulation ---------------------------------------------------
  py::class_<SchedulePolicy> policy(m, "SchedulePolicy");
  py::enum_<SchedulePolicy::Kind>(policy, "Kind")
      .value("Periodic", SchedulePolicy::Kind::Periodic)
      .value("Random", SchedulePolicy::Kind::Random);
  policy.def(py::init<>())
      .def_readwrite("kind", &SchedulePolicy::kind)
      .def_readwrite("xi", &SchedulePolicy::xi)
      .def_readwrite("N", &SchedulePolicy::N)
      .def_readwrite("xi_lo", &SchedulePolicy::xi_lo)
      .def_readwrite("xi_hi", &SchedulePolicy::xi_hi)
      .def_readwrite("N_lo", &SchedulePolicy::N_lo)
      .def_readwrite("N_hi", &SchedulePolicy::N_hi);

  py::class_<TriggerSchedule::Round>(m, "Round")
      .def_readonly("gaps", &TriggerSchedule::Round::gaps);
  py::class_<TriggerSchedule>(m, "TriggerSchedule")
      .def_readonly("rounds", &TriggerSchedule::rounds)
      .def("total_duration", &TriggerSchedule::total_duration);
  m.def("generate_schedule", &generate_schedule, py::arg("policy"), py::arg("horizon"),
        py::arg("seed"));

  py::class_<EventRecord>(m, "EventRecord")
      .def_readonly("t", &EventRecord::t)
      .def_readonly("kind", &EventRecord::kind);
  py::class_<TrajectorySample>(m, "TrajectorySample")
      .def_readonly("t", &TrajectorySample::t)
      .def_readonly("state", &TrajectorySample::state)
      .def_readonly("V", &TrajectorySample::V)
      .def_readonly("W_eps", &TrajectorySample::W_eps);
  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("samples", &Trajectory::samples)
      .def_readonly("events", &Trajectory::events)
      .def_readonly("diverged", &Trajectory::diverged)
      .def_readonly("t_divergence", &Trajectory::t_divergence);

  py::class_<SimOptions>(m, "SimOptions")
      .def(py::init<>())
      .def_readwrite("divergence_guard", &SimOptions::divergence_guard)
      .def_readwrite("dt_max", &SimOptions::dt_max)
      .def_readwrite("certificate_diagnostics", &SimOptions::certificate_diagnostics)
      .def_readwrite("gamma", &SimOptions::gamma);

  m.def("simulate", &simulate, py::arg("network"), py::arg("tree"), py::arg("cost"),
        py::arg("gains"), py::arg("schedule"), py::arg("scenario"),
        py::arg("initial_state"), py::arg("options") = SimOptions{},
        py::call_guard<py::gil_scoped_release>());
}
