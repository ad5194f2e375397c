// Python bindings. Vertices and agents are 0-based; configurations are
// (N, n) arrays with one agent per row.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <utility>
#include <vector>

#include "formctl/configspace.hpp"
#include "formctl/digraph.hpp"
#include "formctl/dynamics.hpp"
#include "formctl/errors.hpp"
#include "formctl/larc.hpp"
#include "formctl/liealg.hpp"
#include "formctl/steering.hpp"

namespace py = pybind11;
using namespace formctl;

namespace {

using Agents = Eigen::MatrixXd;
using EdgeList = std::vector<std::pair<int, int>>;
using ControlDict = std::map<std::pair<int, int>, double>;

Configuration to_configuration(const Agents& agents) { return Configuration::from_agents(agents); }

Digraph make_graph(int n, const EdgeList& edges) {
  std::vector<Edge> out;
  out.reserve(edges.size());
  for (const auto& [i, j] : edges) out.push_back({i, j});
  return Digraph(n, std::move(out));
}

EdgeList edge_list(const Digraph& g) {
  EdgeList out;
  for (const auto& e : g.edges()) out.emplace_back(e.from, e.to);
  return out;
}

ControlValues to_controls(const ControlDict& u) {
  ControlValues out;
  for (const auto& [e, v] : u) out[{e.first, e.second}] = v;
  return out;
}

ControlDict from_controls(const ControlValues& u) {
  ControlDict out;
  for (const auto& [e, v] : u) out[{e.from, e.to}] = v;
  return out;
}

ControlSchedule to_schedule(const std::vector<double>& grid, const std::vector<ControlDict>& values) {
  ControlSchedule s;
  s.grid = grid;
  for (const auto& v : values) s.values.push_back(to_controls(v));
  return s;
}

py::dict schedule_dict(const ControlSchedule& s) {
  py::dict d;
  d["grid"] = s.grid;
  std::vector<ControlDict> values;
  for (const auto& v : s.values) values.push_back(from_controls(v));
  d["controls"] = values;
  return d;
}

GraphSchedule to_graph_schedule(const std::vector<std::pair<double, Digraph>>& segments, double horizon) {
  std::vector<GraphSchedule::Segment> out;
  for (const auto& [t, g] : segments) out.push_back({t, g});
  return GraphSchedule(std::move(out), horizon);
}

// Returns (times, states) with states shaped (samples, N, n).
py::tuple trajectory_arrays(const Trajectory& traj) {
  const py::ssize_t samples = static_cast<py::ssize_t>(traj.states.size());
  const py::ssize_t agents = samples ? traj.states.front().num_agents() : 0;
  const py::ssize_t dim = samples ? traj.states.front().dim() : 0;
  py::array_t<double> states({samples, agents, dim});
  auto view = states.mutable_unchecked<3>();
  for (py::ssize_t s = 0; s < samples; ++s) {
    const Agents m = traj.states[s].agent_matrix();
    for (py::ssize_t i = 0; i < agents; ++i)
      for (py::ssize_t c = 0; c < dim; ++c) view(s, i, c) = m(i, c);
  }
  return py::make_tuple(py::array_t<double>(traj.times.size(), traj.times.data()), states);
}

Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> dense(const ZeroRowSumMatrix& m) {
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(m.size(), m.size());
  for (int r = 0; r < m.size(); ++r)
    for (int c = 0; c < m.size(); ++c) out(r, c) = m(r, c);
  return out;
}

SteerOptions steer_options(std::uint64_t seed, int starts, int max_iterations) {
  SteerOptions o;
  o.seed = seed;
  o.starts = starts;
  o.max_iterations = max_iterations;
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Formation control on digraphs: structure, Lie algebra rank and steering";

  static py::exception<Error> error_type(m, "FormctlError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object instance = py::reinterpret_borrow<py::object>(error_type)(e.what());
      instance.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), instance.ptr());
    }
  });

  py::class_<Digraph>(m, "Digraph")
      .def(py::init(&make_graph), py::arg("num_vertices"), py::arg("edges"))
      .def_static("complete", &Digraph::complete)
      .def_static("cycle", &Digraph::cycle)
      .def_static("path", &Digraph::path)
      .def_property_readonly("num_vertices", &Digraph::num_vertices)
      .def_property_readonly("num_edges", &Digraph::num_edges)
      .def_property_readonly("edges", &edge_list)
      .def("has_edge", &Digraph::has_edge)
      .def("__eq__", [](const Digraph& a, const Digraph& b) { return a == b; })
      .def("__repr__", [](const Digraph& g) {
        return "Digraph(" + std::to_string(g.num_vertices()) + ", " + std::to_string(g.num_edges()) + " edges)";
      });

  py::class_<ScdReport>(m, "ScdReport")
      .def_readonly("components", &ScdReport::components)
      .def_readonly("component_of", &ScdReport::component_of)
      .def_readonly("skeleton", &ScdReport::skeleton)
      .def_readonly("maximal_set", &ScdReport::maximal_set)
      .def_property_readonly("component_sizes", &ScdReport::component_sizes);

  m.def("is_weakly_connected", &is_weakly_connected);
  m.def("coarse_scd", &coarse_scd, "Strongly connected decomposition with skeleton and maximal components.");
  m.def("transitive_closure", &transitive_closure);
  m.def(
      "structural_verdict",
      [](const Digraph& g, int n) {
        const auto v = structural_verdict(g, n);
        return py::make_tuple(std::string(to_string(v.kind)), v.offending_components);
      },
      py::arg("graph"), py::arg("n"), "Returns (kind, offending maximal components).");

  m.def(
      "lie_basis",
      [](const Digraph& g, const std::string& route) {
        const auto r = route == "structural" ? BracketRoute::Structural : BracketRoute::Dense;
        std::vector<Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> out;
        const LieBasis basis = lie_closure(generators_of(g), r);
        for (const auto& e : basis.elements()) out.push_back(dense(e));
        return out;
      },
      py::arg("graph"), py::arg("route") = "dense", "Integer basis of the Lie algebra generated by the edges.");
  m.def(
      "lie_dimension",
      [](const Digraph& g) { return lie_closure(generators_of(g)).dimension(); }, py::arg("graph"));
  m.def(
      "closure_check",
      [](const Digraph& g) { return span_equal(lie_closure(generators_of(g)), generator_basis(transitive_closure(g))); },
      py::arg("graph"), "Whether the Lie closure equals the span of the transitive-closure generators.");

  m.def(
      "configuration_rank", [](const Agents& p, double tau) { return configuration_rank(to_configuration(p), std::nullopt, tau); },
      py::arg("agents"), py::arg("tau") = kDefaultRankTolerance);
  m.def(
      "in_q",
      [](const Agents& p, const Digraph& g, double tau) { return in_q(to_configuration(p), coarse_scd(g), tau).in_q; },
      py::arg("agents"), py::arg("graph"), py::arg("tau") = kDefaultRankTolerance);
  m.def("stratum_dimension", &stratum_dimension, py::arg("k"), py::arg("num_agents"), py::arg("dim"));
  m.def(
      "sample_configuration",
      [](int n, int num_agents, std::uint64_t seed, std::optional<int> rank) {
        const SampleKind kind = rank ? SampleKind::rank(*rank) : SampleKind::uniform();
        return sample_configuration(n, num_agents, kind, seed).agent_matrix();
      },
      py::arg("n"), py::arg("num_agents"), py::arg("seed"), py::arg("rank") = py::none());

  py::class_<LarcReport>(m, "LarcReport")
      .def_readonly("dim", &LarcReport::dim)
      .def_readonly("required", &LarcReport::required)
      .def_readonly("passes", &LarcReport::passes)
      .def_readonly("per_agent_ranks", &LarcReport::per_agent_ranks)
      .def_readonly("closure_edges", &LarcReport::closure_edges)
      .def_readonly("slow_path_dim", &LarcReport::slow_path_dim)
      .def_readonly("bracket_path_dim", &LarcReport::bracket_path_dim);

  m.def(
      "lie_algebra_at",
      [](const Agents& p, const Digraph& g, double tau, bool debug_slow_path) {
        return lie_algebra_at(to_configuration(p), g, {tau, debug_slow_path});
      },
      py::arg("agents"), py::arg("graph"), py::arg("tau") = kDefaultRankTolerance, py::arg("debug_slow_path") = false);
  m.def(
      "witness_basis",
      [](const Agents& p, const Digraph& g) {
        const auto basis = construct_witness_basis(to_configuration(p), g);
        std::vector<std::string> labels;
        for (const auto& l : basis.labels) labels.push_back(to_string(l));
        return py::make_tuple(Eigen::MatrixXd(basis.as_matrix()), labels);
      },
      py::arg("agents"), py::arg("graph"), "Returns (matrix with coordinate-major columns, labels).");

  m.def(
      "flow_constant",
      [](const Digraph& g, const ControlDict& u, const Agents& p, double h) {
        return flow_constant(g, to_controls(u), to_configuration(p), h).agent_matrix();
      },
      py::arg("graph"), py::arg("controls"), py::arg("agents"), py::arg("h"));
  m.def(
      "simulate",
      [](const std::vector<std::pair<double, Digraph>>& graphs, double horizon, const std::vector<double>& grid,
         const std::vector<ControlDict>& values, const Agents& p0, double dt) {
        return trajectory_arrays(
            simulate(to_graph_schedule(graphs, horizon), to_schedule(grid, values), to_configuration(p0), dt));
      },
      py::arg("graphs"), py::arg("horizon"), py::arg("grid"), py::arg("controls"), py::arg("agents"), py::arg("dt"),
      "graphs is a list of (start time, Digraph). Returns (times, states).");
  m.def(
      "steer",
      [](const Digraph& g, const Agents& p0, const Agents& p1, int segments, double horizon, std::uint64_t seed,
         int starts, int max_iterations) {
        const auto r = steer(g, to_configuration(p0), to_configuration(p1), segments, horizon,
                             steer_options(seed, starts, max_iterations));
        py::dict d = schedule_dict(r.schedule);
        d["residual"] = r.residual;
        d["best_start"] = r.best_start;
        d["iterations"] = r.iterations;
        d["warnings"] = r.warnings;
        return d;
      },
      py::arg("graph"), py::arg("start"), py::arg("target"), py::arg("segments") = 6, py::arg("horizon") = 1.0,
      py::arg("seed") = 0, py::arg("starts") = 4, py::arg("max_iterations") = 200);
  m.def(
      "track_path",
      [](const std::vector<std::pair<double, Digraph>>& graphs, double horizon,
         const std::vector<std::pair<double, Agents>>& waypoints, double epsilon, int segments_per_leg,
         std::uint64_t seed) {
        std::vector<Waypoint> w;
        for (const auto& [t, p] : waypoints) w.push_back({t, to_configuration(p)});
        TrackOptions o;
        o.segments_per_leg = segments_per_leg;
        o.steer.seed = seed;
        const auto r = track_path(to_graph_schedule(graphs, horizon), w, epsilon, o);
        py::dict d = schedule_dict(r.schedule);
        const auto arrays = trajectory_arrays(r.trajectory);
        d["times"] = arrays[0];
        d["states"] = arrays[1];
        d["max_deviation"] = r.max_deviation;
        d["leg_residuals"] = r.leg_residuals;
        d["warnings"] = r.warnings;
        return d;
      },
      py::arg("graphs"), py::arg("horizon"), py::arg("waypoints"), py::arg("epsilon"),
      py::arg("segments_per_leg") = 4, py::arg("seed") = 0);
}
