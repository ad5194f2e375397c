// formctl: command-line front end for the formation-control library.
//
// Exit status: 0 on success, 1 on domain errors, 2 on I/O or format errors.

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "formctl/configspace.hpp"
#include "formctl/digraph.hpp"
#include "formctl/dynamics.hpp"
#include "formctl/errors.hpp"
#include "formctl/io.hpp"
#include "formctl/larc.hpp"
#include "formctl/liealg.hpp"
#include "formctl/steering.hpp"

using namespace formctl;
using nlohmann::json;

namespace {

struct Options {
  std::string graph;
  std::string config;
  std::string target;
  std::string controls;
  std::string schedule;
  std::string waypoints;
  std::string out;
  std::string format;
  std::string kind = "uniform";
  int n = 0;
  int num_agents = 0;
  int k = 0;
  int segments = 6;
  int refinements = TrackOptions{}.max_refinements;
  std::uint64_t seed = 0;
  int starts = 4;
  double tol = kDefaultRankTolerance;
  double horizon = 1.0;
  double dt = 0.0;
  double epsilon = 0.05;
  bool debug_slow_path = false;
};

std::string one_based(const std::vector<int>& v) {
  std::string out = "{";
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? ", " : "") + std::to_string(v[k] + 1);
  return out + "}";
}

void emit(const Options& o, const std::string& content) {
  if (!o.out.empty()) io::write_file(o.out, content);
}

void require_dim_match(const Configuration& p, const Digraph& g) {
  if (p.num_agents() != g.num_vertices()) {
    throw Error(ErrorCode::SizeMismatch, "configuration has " + std::to_string(p.num_agents()) + " agents, graph has " +
                                             std::to_string(g.num_vertices()) + " vertices");
  }
}

GraphSchedule load_schedule(const Options& o, double horizon) {
  if (!o.schedule.empty()) return io::read_graph_schedule(o.schedule, horizon);
  return GraphSchedule::constant(io::read_graph(o.graph), horizon);
}

int run_analyze(const Options& o) {
  const Digraph g = io::read_graph(o.graph);
  const ScdReport scd = coarse_scd(g);
  const StructuralVerdict verdict = structural_verdict(g, o.n);
  std::cout << "vertices: " << g.num_vertices() << "; edges: " << g.num_edges() << "; n = " << o.n << "\n";
  std::cout << "components: " << scd.num_components() << "\n";
  for (std::size_t c = 0; c < scd.num_components(); ++c) {
    std::cout << "  " << c + 1 << ": " << one_based(scd.components[c]) << " size " << scd.components[c].size()
              << (scd.is_maximal(static_cast<int>(c)) ? " (maximal)" : "") << "\n";
  }
  std::cout << "skeleton edges:";
  for (const auto& e : scd.skeleton.edges()) std::cout << " " << e.from + 1 << "->" << e.to + 1;
  std::cout << "\nW+ = " << one_based(scd.maximal_set) << "\n";
  std::cout << "verdict: " << to_string(verdict.kind);
  if (!verdict.offending_components.empty()) std::cout << "; offending components " << one_based(verdict.offending_components);
  std::cout << "\n";

  json j;
  j["N"] = g.num_vertices();
  j["n"] = o.n;
  j["components"] = json::array();
  for (const auto& members : scd.components) {
    json m = json::array();
    for (int v : members) m.push_back(v + 1);
    j["components"].push_back(m);
  }
  json skeleton = json::array();
  for (const auto& e : scd.skeleton.edges()) skeleton.push_back({e.from + 1, e.to + 1});
  j["skeleton"] = skeleton;
  json maximal = json::array();
  for (int c : scd.maximal_set) maximal.push_back(c + 1);
  j["maximal"] = maximal;
  j["verdict"] = to_string(verdict.kind);
  json offending = json::array();
  for (int c : verdict.offending_components) offending.push_back(c + 1);
  j["offending"] = offending;
  emit(o, j.dump(2) + "\n");
  return 0;
}

int run_closure(const Options& o) {
  const Digraph g = io::read_graph(o.graph);
  if (!is_weakly_connected(g)) throw Error(ErrorCode::NotWeaklyConnected, "graph is not weakly connected");
  const Digraph closure = transitive_closure(g);
  const LieBasis lie = lie_closure(generators_of(g));
  const bool check = span_equal(lie, generator_basis(closure));
  std::cout << "closure edges: " << closure.num_edges() << "; lie dimension: " << lie.dimension()
            << "; LIEAL check: " << (check ? "PASS" : "FAIL") << "\n";
  if (o.format == "text" || o.format.empty()) {
    emit(o, io::format_lie_basis(lie));
  } else {
    emit(o, io::format_graph(closure));
  }
  return check ? 0 : 1;
}

int run_larc(const Options& o) {
  const Digraph g = io::read_graph(o.graph);
  const Configuration p = io::read_configuration(o.config);
  require_dim_match(p, g);
  const LarcReport report = lie_algebra_at(p, g, LarcOptions{o.tol, o.debug_slow_path});
  std::cout << "dim " << report.dim << " / " << report.required << ": " << (report.passes ? "PASS" : "FAIL") << "\n";
  std::cout << "per-agent ranks:";
  for (int r : report.per_agent_ranks) std::cout << " " << r;
  std::cout << "\nclosure edges: " << report.closure_edges << "\ntol = " << o.tol << "\n";
  if (report.slow_path_dim) {
    std::cout << "stacked-field rank: " << *report.slow_path_dim << "; bracketed-field rank: " << *report.bracket_path_dim
              << "\n";
  }
  emit(o, io::larc_report_json(report));
  return 0;
}

int run_witness(const Options& o) {
  const Digraph g = io::read_graph(o.graph);
  const Configuration p = io::read_configuration(o.config);
  require_dim_match(p, g);
  const WitnessBasis basis = construct_witness_basis(p, g, o.tol);
  const int rank = numeric_rank(basis.as_matrix(), o.tol);
  std::cout << "witness vectors: " << basis.vectors.size() << "; rank " << rank << " / " << p.dim() * p.num_agents()
            << "\n";
  for (std::size_t c = 0; c < basis.simplices.size(); ++c) std::cout << "  simplex " << one_based(basis.simplices[c]) << "\n";
  std::cout << "tol = " << o.tol << "\n";
  emit(o, io::witness_csv(basis));
  return 0;
}

int run_chart(const Options& o) {
  const Configuration p = io::read_configuration(o.config);
  const StratumChart chart = local_chart(p, o.k, o.tol);
  const int d = stratum_dimension(o.k, p.num_agents(), p.dim());
  const Eigen::VectorXd v = chart.forward(p);
  const double round_trip = (chart.inverse(v).coords() - p.coords()).norm();
  std::cout << "rank k = " << o.k << "; stratum dimension d_k = " << d << " of " << p.dim() * p.num_agents() << "\n";
  std::cout << "index choice: " << one_based(chart.index_choice()) << "\n";
  std::cout << "forced zeros: " << chart.forced_zero_indices().size() << "\n";
  std::cout << "center round-trip error: " << round_trip << "\ntol = " << o.tol << "\n";
  json j;
  j["k"] = o.k;
  j["d_k"] = d;
  json choice = json::array();
  for (int i : chart.index_choice()) choice.push_back(i + 1);
  j["index_choice"] = choice;
  json zeros = json::array();
  for (int z : chart.forced_zero_indices()) zeros.push_back(z + 1);
  j["forced_zeros"] = zeros;
  json l = json::array();
  for (Eigen::Index r = 0; r < chart.l_map().rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < chart.l_map().cols(); ++c) row.push_back(chart.l_map()(r, c));
    l.push_back(row);
  }
  j["L"] = l;
  emit(o, j.dump(2) + "\n");
  return 0;
}

int run_simulate(const Options& o) {
  const Configuration p0 = io::read_configuration(o.config);
  const ControlSchedule controls = io::read_control_schedule(o.controls);
  const GraphSchedule schedule = load_schedule(o, controls.horizon());
  double dt = o.dt;
  if (dt <= 0.0) {
    dt = controls.horizon() / 100.0;
    for (std::size_t k = 0; k + 1 < controls.grid.size(); ++k) dt = std::min(dt, controls.grid[k + 1] - controls.grid[k]);
  }
  const Trajectory traj = simulate(schedule, controls, p0, dt);
  const Configuration& last = traj.states.back();
  std::cout << "samples: " << traj.times.size() << "; T = " << controls.horizon() << "; dt = " << dt << "\n";
  std::cout << "final rank: " << configuration_rank(last, std::nullopt, o.tol) << " (initial "
            << configuration_rank(p0, std::nullopt, o.tol) << ")\n";
  emit(o, io::trajectory_csv(traj));
  return 0;
}

int run_steer(const Options& o) {
  const Digraph g = io::read_graph(o.graph);
  const Configuration p0 = io::read_configuration(o.config);
  const Configuration p1 = io::read_configuration(o.target);
  SteerOptions opts;
  opts.seed = o.seed;
  opts.starts = o.starts;
  const SteerResult result = steer(g, p0, p1, o.segments, o.horizon, opts);
  std::cout << "residual: " << io::format_double(result.residual) << "\n";
  std::cout << "best start: " << result.best_start << "; iterations: " << result.iterations << "\n";
  std::cout << "segments = " << o.segments << "; T = " << o.horizon << "; seed = " << o.seed << "; starts = " << o.starts
            << "; tolerance = " << opts.tolerance << "; fd step = " << opts.fd_step << "\n";
  for (const auto& w : result.warnings) std::cout << "warning: " << w << "\n";
  emit(o, io::control_schedule_csv(result.schedule));
  return 0;
}

int run_track(const Options& o) {
  const auto waypoints = io::read_waypoints(o.waypoints);
  const GraphSchedule schedule = load_schedule(o, o.horizon);
  TrackOptions opts;
  opts.segments_per_leg = o.segments;
  opts.max_refinements = o.refinements;
  opts.dt = o.dt;
  opts.steer.seed = o.seed;
  opts.steer.starts = o.starts;
  const Configuration start = o.config.empty() ? waypoints.front().p : io::read_configuration(o.config);
  const TrackResult result = track_path(schedule, waypoints, o.epsilon, start, opts);
  std::cout << "max deviation: " << io::format_double(result.max_deviation) << " (epsilon = " << o.epsilon << "): "
            << (result.max_deviation < o.epsilon ? "PASS" : "FAIL") << "\n";
  std::cout << "legs: " << result.leg_residuals.size() << "; segments per leg = " << o.segments << "; seed = " << o.seed
            << "; T = " << o.horizon << "\n";
  for (const auto& w : result.warnings) std::cout << "warning: " << w << "\n";
  emit(o, io::trajectory_csv(result.trajectory));
  if (!o.controls.empty()) io::write_file(o.controls, io::control_schedule_csv(result.schedule));
  return result.max_deviation < o.epsilon ? 0 : 1;
}

int run_sample(const Options& o) {
  SampleKind kind = SampleKind::uniform();
  if (o.kind == "rank") {
    kind = SampleKind::rank(o.k);
  } else if (o.kind != "uniform") {
    throw Error(ErrorCode::InvalidArgument, "unknown sample kind '" + o.kind + "'");
  }
  const Configuration p = sample_configuration(o.n, o.num_agents, kind, o.seed, o.tol);
  const std::string content = o.format == "csv" ? io::configuration_csv(p) : io::configuration_json(p);
  if (o.out.empty()) {
    std::cout << content;
  } else {
    io::write_file(o.out, content);
    std::cout << "sampled N = " << o.num_agents << ", n = " << o.n << ", kind = " << o.kind
              << (o.kind == "rank" ? " " + std::to_string(o.k) : "") << ", seed = " << o.seed
              << "; rank " << configuration_rank(p, std::nullopt, o.tol) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Controllability analysis, simulation and steering for formation control on digraphs"};
  app.require_subcommand(1);
  Options o;

  auto graph = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--graph", o.graph, "Graph file (N <count>, then one 'i j' per edge)")->check(CLI::ExistingFile);
    if (required) opt->required();
    return opt;
  };
  auto config = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--config", o.config, "Configuration file (.json or .csv)")->check(CLI::ExistingFile);
    if (required) opt->required();
  };
  auto out = [&](CLI::App* sub) { sub->add_option("--out", o.out, "Machine-readable output path"); };
  auto tol = [&](CLI::App* sub) { sub->add_option("--tol", o.tol, "Relative singular-value tolerance")->check(CLI::PositiveNumber); };

  auto* analyze = app.add_subcommand("analyze", "Strong components, skeleton and structural verdict");
  graph(analyze, true);
  analyze->add_option("--n", o.n, "Ambient dimension")->required()->check(CLI::PositiveNumber);
  out(analyze);
  analyze->add_option("--format", o.format)->check(CLI::IsMember({"json"}));

  auto* closure = app.add_subcommand("closure", "Transitive closure and Lie closure of the edge generators");
  graph(closure, true);
  out(closure);
  closure->add_option("--format", o.format, "text writes the Lie basis, json/csv the closure graph")
      ->check(CLI::IsMember({"text", "json", "csv"}));

  auto* larc = app.add_subcommand("larc", "Lie algebra rank condition at a configuration");
  graph(larc, true);
  config(larc, true);
  tol(larc);
  out(larc);
  larc->add_flag("--debug-slow-path", o.debug_slow_path, "Cross-check against stacked and bracketed field ranks");
  larc->add_option("--format", o.format)->check(CLI::IsMember({"json"}));

  auto* witness = app.add_subcommand("witness", "Explicit spanning set of tangent vectors");
  graph(witness, true);
  config(witness, true);
  tol(witness);
  out(witness);
  witness->add_option("--format", o.format)->check(CLI::IsMember({"csv"}));

  auto* chart = app.add_subcommand("chart", "Local chart of a rank stratum");
  config(chart, true);
  chart->add_option("--k", o.k, "Stratum rank")->required();
  tol(chart);
  out(chart);
  chart->add_option("--format", o.format)->check(CLI::IsMember({"json"}));

  auto* sim = app.add_subcommand("simulate", "Exact flow of piecewise-constant controls");
  auto* sim_graph = graph(sim, false);
  sim->add_option("--schedule", o.schedule, "Graph schedule JSON")->check(CLI::ExistingFile)->excludes(sim_graph);
  config(sim, true);
  sim->add_option("--controls", o.controls, "Control schedule CSV")->required()->check(CLI::ExistingFile);
  sim->add_option("--dt", o.dt, "Sampling step (default T / 100)")->check(CLI::PositiveNumber);
  out(sim);
  sim->add_option("--format", o.format)->check(CLI::IsMember({"csv"}));

  auto* st = app.add_subcommand("steer", "Shooting for piecewise-constant controls between configurations");
  graph(st, true);
  config(st, true);
  st->add_option("--target", o.target, "Target configuration")->required()->check(CLI::ExistingFile);
  st->add_option("--T", o.horizon, "Horizon")->check(CLI::PositiveNumber);
  st->add_option("--segments", o.segments, "Control intervals")->check(CLI::Range(2, 1000));
  st->add_option("--seed", o.seed, "Seed for the random restarts");
  st->add_option("--starts", o.starts, "Number of starts")->check(CLI::Range(1, 1000));
  out(st);
  st->add_option("--format", o.format)->check(CLI::IsMember({"csv"}));

  auto* tr = app.add_subcommand("track", "Approximate tracking of a waypoint path");
  auto* tr_graph = graph(tr, false);
  tr->add_option("--schedule", o.schedule, "Graph schedule JSON")->check(CLI::ExistingFile)->excludes(tr_graph);
  tr->add_option("--waypoints", o.waypoints, "Waypoints JSON")->required()->check(CLI::ExistingFile);
  config(tr, false);
  tr->add_option("--T", o.horizon, "Horizon")->check(CLI::PositiveNumber);
  tr->add_option("--epsilon", o.epsilon, "Tracking tolerance")->check(CLI::PositiveNumber);
  tr->add_option("--segments", o.segments, "Control intervals per leg")->check(CLI::Range(2, 1000));
  tr->add_option("--refinements", o.refinements, "How many times a leg that strays past epsilon/2 may be re-split")
      ->check(CLI::Range(0, 8));
  tr->add_option("--dt", o.dt, "Sampling step of the trajectory")->check(CLI::PositiveNumber);
  tr->add_option("--seed", o.seed, "Seed for the random restarts");
  tr->add_option("--starts", o.starts, "Number of starts")->check(CLI::Range(1, 1000));
  tr->add_option("--controls", o.controls, "Also write the control schedule CSV here");
  out(tr);
  tr->add_option("--format", o.format)->check(CLI::IsMember({"csv"}));

  auto* sample = app.add_subcommand("sample", "Seeded random configuration");
  sample->add_option("--n", o.n, "Ambient dimension")->required()->check(CLI::PositiveNumber);
  sample->add_option("--N", o.num_agents, "Number of agents")->required()->check(CLI::PositiveNumber);
  sample->add_option("--seed", o.seed, "Seed");
  sample->add_option("--kind", o.kind, "uniform or rank")->check(CLI::IsMember({"uniform", "rank"}));
  sample->add_option("--k", o.k, "Rank for --kind rank");
  tol(sample);
  out(sample);
  sample->add_option("--format", o.format)->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*analyze) return run_analyze(o);
    if (*closure) return run_closure(o);
    if (*larc) return run_larc(o);
    if (*witness) return run_witness(o);
    if (*chart) return run_chart(o);
    if (*sim) {
      if (o.graph.empty() && o.schedule.empty()) throw Error(ErrorCode::InvalidArgument, "simulate needs --graph or --schedule");
      return run_simulate(o);
    }
    if (*st) return run_steer(o);
    if (*tr) {
      if (o.graph.empty() && o.schedule.empty()) throw Error(ErrorCode::InvalidArgument, "track needs --graph or --schedule");
      return run_track(o);
    }
    if (*sample) return run_sample(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_io_error(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
