#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "formctl/configspace.hpp"
#include "formctl/digraph.hpp"
#include "formctl/dynamics.hpp"

namespace formctl {

struct SteerOptions {
  int starts = 4;              // multi-start count; start 0 is the zero control
  int max_iterations = 200;    // per start
  double initial_damping = 1e-3;
  double fd_step = 1e-6;       // relative forward-difference step
  double tolerance = 1e-12;    // residual norm treated as converged
  double start_scale = 1.0;    // random starts draw controls from [-scale, scale]
  std::uint64_t seed = 0;
};

struct SteerResult {
  ControlSchedule schedule;
  double residual = 0.0;  // Euclidean norm of final state minus target
  int best_start = 0;
  int iterations = 0;     // iterations spent on the winning start
  bool no_progress = false;
  std::vector<std::string> warnings;
};

/// Piecewise-constant controls on `segments` equal intervals of [0, horizon]
/// that drive p0 towards p1, by single shooting with damped Gauss-Newton.
///
/// Starts run in index order and the search stops at the first start whose
/// residual reaches `tolerance`; otherwise the smallest residual wins, ties
/// going to the lower start index.
SteerResult steer(const Digraph& g, const Configuration& p0, const Configuration& p1, int segments, double horizon,
                  const SteerOptions& options = {});

struct Waypoint {
  double t = 0.0;
  Configuration p;
};

struct TrackOptions {
  int segments_per_leg = 4;  // intermediate targets per leg
  int max_refinements = 2;   // nesting depth for re-planning legs that stray past epsilon / 2
  double dt = 0.0;  // sampling step of the reported trajectory; 0 picks horizon / 400
  SteerOptions steer;
};

struct TrackResult {
  ControlSchedule schedule;
  Trajectory trajectory;
  double max_deviation = 0.0;  // against the piecewise-linear waypoint path
  std::vector<double> leg_residuals;
  std::vector<std::string> warnings;
};

/// Reference path through the waypoints, linear in between.
Configuration interpolate_waypoints(const std::vector<Waypoint>& waypoints, double t);

/// Follows the waypoint path leg by leg, re-planning from the achieved state at
/// each waypoint with the graph active there. Legs whose controls stray more
/// than epsilon / 2 from the path are cut into shorter pieces and re-planned. Switching times of the schedule
/// must be waypoint times. Throws SegmentFailure naming the first leg whose
/// endpoint residual exceeds epsilon / 2.
TrackResult track_path(const GraphSchedule& schedule, const std::vector<Waypoint>& waypoints, double epsilon,
                       const Configuration& start, const TrackOptions& options = {});

TrackResult track_path(const GraphSchedule& schedule, const std::vector<Waypoint>& waypoints, double epsilon,
                       const TrackOptions& options = {});

}  // namespace formctl
