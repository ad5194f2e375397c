#include "formctl/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "formctl/errors.hpp"

namespace formctl {

namespace {

// Slack for comparing times that came out of floating-point arithmetic.
double time_slack(double horizon) { return 1e-12 * std::max(1.0, std::abs(horizon)); }

std::string edge_name(const Edge& e) { return std::to_string(e.from + 1) + "->" + std::to_string(e.to + 1); }

Eigen::MatrixXd apply_to_agents(const Eigen::MatrixXd& m, const Configuration& p) { return m * p.agent_matrix(); }

}  // namespace

Eigen::MatrixXd control_matrix(const Digraph& g, const ControlValues& u) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(g.num_vertices(), g.num_vertices());
  for (const auto& [edge, value] : u) {
    if (!g.has_edge(edge.from, edge.to)) throw Error(ErrorCode::UnknownEdge, "edge " + edge_name(edge) + " not in graph");
    m(edge.from, edge.from) -= value;
    m(edge.from, edge.to) += value;
  }
  return m;
}

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m) { return m.exp(); }

Configuration flow_constant(const Digraph& g, const ControlValues& u, const Configuration& p, double h) {
  if (h < 0.0) throw Error(ErrorCode::NegativeDuration, "flow duration is negative");
  if (p.num_agents() != g.num_vertices()) throw Error(ErrorCode::SizeMismatch, "agent count differs from vertex count");
  const Eigen::MatrixXd m = control_matrix(g, u);
  if (h == 0.0 || m.isZero(0.0)) return p;
  return Configuration::from_agents(apply_to_agents(matrix_exponential(h * m), p));
}

GraphSchedule::GraphSchedule(std::vector<Segment> segments, double horizon)
    : segments_(std::move(segments)), horizon_(horizon) {
  if (segments_.empty()) throw Error(ErrorCode::InconsistentSchedule, "graph schedule has no segments");
  if (!(horizon > 0.0)) throw Error(ErrorCode::InconsistentSchedule, "horizon must be positive");
  if (segments_.front().start != 0.0) throw Error(ErrorCode::InconsistentSchedule, "first segment must start at 0");
  for (std::size_t k = 1; k < segments_.size(); ++k) {
    if (!(segments_[k].start > segments_[k - 1].start)) {
      throw Error(ErrorCode::InconsistentSchedule, "segment start times must increase strictly");
    }
    if (segments_[k].graph.num_vertices() != segments_.front().graph.num_vertices()) {
      throw Error(ErrorCode::InconsistentSchedule, "segments disagree on vertex count");
    }
  }
  if (!(segments_.back().start < horizon)) {
    throw Error(ErrorCode::InconsistentSchedule, "segment starts must lie before the horizon");
  }
}

GraphSchedule GraphSchedule::constant(Digraph g, double horizon) {
  return GraphSchedule({Segment{0.0, std::move(g)}}, horizon);
}

std::size_t GraphSchedule::segment_index(double t) const {
  std::size_t k = 0;
  while (k + 1 < segments_.size() && segments_[k + 1].start <= t) ++k;
  return k;
}

std::vector<double> GraphSchedule::switching_times() const {
  std::vector<double> out;
  for (std::size_t k = 1; k < segments_.size(); ++k) out.push_back(segments_[k].start);
  return out;
}

void ControlSchedule::validate(const GraphSchedule& schedule) const {
  if (grid.size() < 2 || values.size() + 1 != grid.size()) {
    throw Error(ErrorCode::InconsistentSchedule, "control grid needs M+1 breakpoints for M intervals");
  }
  const double slack = time_slack(schedule.horizon());
  if (grid.front() != 0.0) throw Error(ErrorCode::InconsistentSchedule, "control grid must start at 0");
  if (std::abs(grid.back() - schedule.horizon()) > slack) {
    throw Error(ErrorCode::InconsistentSchedule, "control grid must end at the horizon");
  }
  const auto switches = schedule.switching_times();
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    if (!(grid[k + 1] > grid[k])) throw Error(ErrorCode::InconsistentSchedule, "control grid must increase strictly");
    for (double s : switches) {
      if (s > grid[k] + slack && s < grid[k + 1] - slack) {
        throw Error(ErrorCode::InconsistentSchedule, "control interval straddles switching time " + std::to_string(s));
      }
    }
    const Digraph& g = schedule.active(grid[k] + slack);
    for (const auto& [edge, value] : values[k]) {
      if (!g.has_edge(edge.from, edge.to)) {
        throw Error(ErrorCode::UnknownEdge, "edge " + edge_name(edge) + " inactive on interval " + std::to_string(k + 1));
      }
    }
  }
}

namespace {

// Breakpoints plus multiples of dt, merged within the time slack.
std::vector<double> sample_times(const std::vector<double>& breakpoints, double horizon, double dt) {
  std::vector<double> times = breakpoints;
  for (long m = 1;; ++m) {
    const double t = static_cast<double>(m) * dt;
    if (t >= horizon) break;
    times.push_back(t);
  }
  std::sort(times.begin(), times.end());
  const double slack = time_slack(horizon);
  std::vector<double> merged;
  for (double t : times) {
    if (!merged.empty() && t - merged.back() <= slack) {
      // Keep exact breakpoints over dt multiples.
      if (std::find(breakpoints.begin(), breakpoints.end(), t) != breakpoints.end()) merged.back() = t;
      continue;
    }
    merged.push_back(t);
  }
  return merged;
}

void require_step(double dt, double shortest, double horizon) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "time step must be positive");
  if (dt > shortest + time_slack(horizon)) {
    throw Error(ErrorCode::StepTooLarge, "dt " + std::to_string(dt) + " exceeds shortest interval " + std::to_string(shortest));
  }
}

}  // namespace

Trajectory simulate(const GraphSchedule& schedule, const ControlSchedule& controls, const Configuration& p0, double dt) {
  controls.validate(schedule);
  if (p0.num_agents() != schedule.num_vertices()) throw Error(ErrorCode::SizeMismatch, "agent count differs from vertex count");
  double shortest = controls.grid.back();
  for (std::size_t k = 0; k + 1 < controls.grid.size(); ++k) shortest = std::min(shortest, controls.grid[k + 1] - controls.grid[k]);
  require_step(dt, shortest, schedule.horizon());

  const double slack = time_slack(schedule.horizon());
  const auto times = sample_times(controls.grid, controls.grid.back(), dt);
  Trajectory traj;
  traj.times.push_back(times.front());
  traj.states.push_back(p0);

  std::size_t interval = 0;
  Eigen::MatrixXd generator = control_matrix(schedule.active(controls.grid[0] + slack), controls.values[0]);
  Configuration state = p0;
  for (std::size_t s = 1; s < times.size(); ++s) {
    // Samples never straddle a breakpoint since every breakpoint is a sample.
    while (interval + 1 < controls.num_intervals() && times[s - 1] >= controls.grid[interval + 1] - slack) {
      ++interval;
      generator = control_matrix(schedule.active(controls.grid[interval] + slack), controls.values[interval]);
    }
    const double h = times[s] - times[s - 1];
    if (!generator.isZero(0.0)) state = Configuration::from_agents(apply_to_agents(matrix_exponential(h * generator), state));
    traj.times.push_back(times[s]);
    traj.states.push_back(state);
  }
  return traj;
}

Trajectory simulate(const GraphSchedule& schedule, const FeedbackLaw& law, const Configuration& p0, double dt) {
  if (p0.num_agents() != schedule.num_vertices()) throw Error(ErrorCode::SizeMismatch, "agent count differs from vertex count");
  std::vector<double> bounds;
  for (const auto& seg : schedule.segments()) bounds.push_back(seg.start);
  bounds.push_back(schedule.horizon());
  double shortest = schedule.horizon();
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k) shortest = std::min(shortest, bounds[k + 1] - bounds[k]);
  require_step(dt, shortest, schedule.horizon());

  const double slack = time_slack(schedule.horizon());
  const int n = p0.dim();
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(p0);
  Eigen::VectorXd x = p0.coords();

  for (std::size_t seg = 0; seg + 1 < bounds.size(); ++seg) {
    const Digraph& g = schedule.segments()[seg].graph;
    auto rhs = [&](double t, const Eigen::VectorXd& y) {
      Configuration p(n, p0.num_agents(), y);
      Eigen::MatrixXd m = control_matrix(g, law(t, p));
      Eigen::VectorXd out(y.size());
      const Eigen::Index num_agents = p0.num_agents();
      for (int c = 0; c < n; ++c) out.segment(c * num_agents, num_agents) = m * y.segment(c * num_agents, num_agents);
      return out;
    };
    double t = bounds[seg];
    const double end = bounds[seg + 1];
    while (end - t > slack) {
      const double h = std::min(dt, end - t);
      const Eigen::VectorXd k1 = rhs(t, x);
      const Eigen::VectorXd k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1);
      const Eigen::VectorXd k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2);
      const Eigen::VectorXd k4 = rhs(t + h, x + h * k3);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t = (end - (t + h) <= slack) ? end : t + h;
      traj.times.push_back(t);
      traj.states.emplace_back(n, p0.num_agents(), x);
    }
  }
  return traj;
}

}  // namespace formctl
