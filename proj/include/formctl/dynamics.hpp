#pragma once

#include <functional>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "formctl/configspace.hpp"
#include "formctl/digraph.hpp"

namespace formctl {

/// Control value u_ij per edge; edges missing from the map are held at zero.
using ControlValues = std::map<Edge, double>;

/// sum_{i->j} u_ij A_ij as a dense N x N matrix. Throws UnknownEdge for edges outside g.
Eigen::MatrixXd control_matrix(const Digraph& g, const ControlValues& u);

/// exp(m) by scaling and squaring with a Pade approximant.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m);

/// Exact flow over duration h of constant controls: p -> D(exp(h M)) p.
Configuration flow_constant(const Digraph& g, const ControlValues& u, const Configuration& p, double h);

/// Right-continuous piecewise-constant graph over [0, horizon].
class GraphSchedule {
 public:
  struct Segment {
    double start = 0.0;
    Digraph graph;
  };

  GraphSchedule(std::vector<Segment> segments, double horizon);
  static GraphSchedule constant(Digraph g, double horizon);

  const std::vector<Segment>& segments() const noexcept { return segments_; }
  double horizon() const noexcept { return horizon_; }
  int num_vertices() const noexcept { return segments_.front().graph.num_vertices(); }

  std::size_t segment_index(double t) const;
  const Digraph& active(double t) const { return segments_[segment_index(t)].graph; }
  /// Segment starts after 0, ascending.
  std::vector<double> switching_times() const;

 private:
  std::vector<Segment> segments_;
  double horizon_ = 0.0;
};

/// Piecewise-constant controls on the grid 0 = t_0 < ... < t_M.
struct ControlSchedule {
  std::vector<double> grid;
  std::vector<ControlValues> values;

  std::size_t num_intervals() const noexcept { return values.size(); }
  double horizon() const { return grid.empty() ? 0.0 : grid.back(); }

  /// Throws InconsistentSchedule when an interval straddles a switch or the grid
  /// is malformed, UnknownEdge when a control names an edge absent from the active graph.
  void validate(const GraphSchedule& schedule) const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Configuration> states;
};

using FeedbackLaw = std::function<ControlValues(double t, const Configuration& p)>;

/// Exact integration of piecewise-constant controls, sampled at every breakpoint
/// and every multiple of dt. Throws StepTooLarge when dt exceeds the shortest interval.
Trajectory simulate(const GraphSchedule& schedule, const ControlSchedule& controls, const Configuration& p0,
                    double dt);

/// Classical RK4 at step dt for state feedback; steps are cut at switching times.
Trajectory simulate(const GraphSchedule& schedule, const FeedbackLaw& law, const Configuration& p0, double dt);

}  // namespace formctl
