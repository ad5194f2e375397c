#include "formctl/steering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "formctl/errors.hpp"
#include "formctl/larc.hpp"

namespace formctl {

namespace {

// Weighted target on the state reached after `after_segment` intervals.
struct Target {
  int after_segment;
  Eigen::MatrixXd agents;
  double weight;
};

// Single-shooting map from stacked per-interval edge controls to residuals.
class ShootingProblem {
 public:
  ShootingProblem(const Digraph& g, Eigen::MatrixXd start, int segments, double step, std::vector<Target> targets)
      : graph_(g), start_(std::move(start)), segments_(segments), step_(step), targets_(std::move(targets)) {
    residual_size_ = 0;
    for (const auto& t : targets_) residual_size_ += t.agents.size();
  }

  Eigen::Index num_params() const { return static_cast<Eigen::Index>(segments_) * num_edges(); }
  Eigen::Index num_edges() const { return static_cast<Eigen::Index>(graph_.num_edges()); }

  ControlValues controls(const Eigen::VectorXd& u, int segment) const {
    ControlValues out;
    const auto& edges = graph_.edges();
    for (Eigen::Index e = 0; e < num_edges(); ++e) out[edges[e]] = u[segment * num_edges() + e];
    return out;
  }

  Eigen::MatrixXd generator(const Eigen::VectorXd& u, int segment) const {
    const Eigen::Index n = graph_.num_vertices();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    const auto& edges = graph_.edges();
    for (Eigen::Index e = 0; e < num_edges(); ++e) {
      const double v = u[segment * num_edges() + e];
      m(edges[e].from, edges[e].from) -= v;
      m(edges[e].from, edges[e].to) += v;
    }
    return m;
  }

  // States X_0 .. X_M and interval propagators E_1 .. E_M.
  void forward(const Eigen::VectorXd& u, std::vector<Eigen::MatrixXd>& states,
               std::vector<Eigen::MatrixXd>& propagators) const {
    states.assign(1, start_);
    propagators.clear();
    for (int s = 0; s < segments_; ++s) {
      propagators.push_back(matrix_exponential(step_ * generator(u, s)));
      states.push_back(propagators.back() * states.back());
    }
  }

  Eigen::VectorXd residual_from_states(const std::vector<Eigen::MatrixXd>& states) const {
    Eigen::VectorXd r(residual_size_);
    Eigen::Index offset = 0;
    for (const auto& t : targets_) {
      Eigen::MatrixXd d = t.weight * (states[t.after_segment] - t.agents);
      r.segment(offset, d.size()) = Eigen::Map<const Eigen::VectorXd>(d.data(), d.size());
      offset += d.size();
    }
    return r;
  }

  Eigen::VectorXd residual(const Eigen::VectorXd& u) const {
    std::vector<Eigen::MatrixXd> states, propagators;
    forward(u, states, propagators);
    return residual_from_states(states);
  }

  // Forward differences; a perturbation in interval s only touches states after s.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& u, double rel_step) const {
    std::vector<Eigen::MatrixXd> states, propagators;
    forward(u, states, propagators);
    const Eigen::VectorXd base = residual_from_states(states);
    Eigen::MatrixXd jac(residual_size_, num_params());
    const auto& edges = graph_.edges();
    std::vector<Eigen::MatrixXd> perturbed;
    for (int s = 0; s < segments_; ++s) {
      const Eigen::MatrixXd m = generator(u, s);
      for (Eigen::Index e = 0; e < num_edges(); ++e) {
        const Eigen::Index k = s * num_edges() + e;
        const double h = rel_step * std::max(1.0, std::abs(u[k]));
        Eigen::MatrixXd mp = m;
        mp(edges[e].from, edges[e].from) -= h;
        mp(edges[e].from, edges[e].to) += h;
        perturbed = states;
        perturbed[s + 1] = matrix_exponential(step_ * mp) * states[s];
        for (int l = s + 1; l < segments_; ++l) perturbed[l + 1] = propagators[l] * perturbed[l];
        jac.col(k) = (residual_from_states(perturbed) - base) / h;
      }
    }
    return jac;
  }

  // Largest distance from the segment a -> b (traversed at uniform speed over
  // the whole horizon), sampled `samples` times inside every interval.
  double excursion(const Eigen::VectorXd& u, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int samples) const {
    double worst = 0.0;
    Eigen::MatrixXd x = start_;
    for (int s = 0; s < segments_; ++s) {
      const Eigen::MatrixXd sub = matrix_exponential(step_ / samples * generator(u, s));
      for (int k = 1; k <= samples; ++k) {
        x = sub * x;
        const double frac = (s + static_cast<double>(k) / samples) / segments_;
        worst = std::max(worst, (x - (a + frac * (b - a))).norm());
      }
    }
    return worst;
  }

 private:
  const Digraph& graph_;
  Eigen::MatrixXd start_;
  int segments_;
  double step_;
  std::vector<Target> targets_;
  Eigen::Index residual_size_ = 0;
};

struct SolveOutcome {
  Eigen::VectorXd u;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool stalled = false;
};

Eigen::VectorXd damped_step(const Eigen::MatrixXd& jac, const Eigen::VectorXd& r, double lambda) {
  if (jac.rows() <= jac.cols()) {
    Eigen::MatrixXd a = jac * jac.transpose();
    a.diagonal().array() += lambda;
    return -(jac.transpose() * a.ldlt().solve(r));
  }
  Eigen::MatrixXd a = jac.transpose() * jac;
  a.diagonal().array() += lambda;
  return -a.ldlt().solve(jac.transpose() * r);
}

SolveOutcome gauss_newton(const ShootingProblem& problem, Eigen::VectorXd u, const SteerOptions& opts,
                          int max_iterations) {
  SolveOutcome out;
  Eigen::VectorXd r = problem.residual(u);
  double cost = r.allFinite() ? r.squaredNorm() : std::numeric_limits<double>::infinity();
  double lambda = opts.initial_damping;
  int it = 0;
  for (; it < max_iterations; ++it) {
    if (std::sqrt(cost) <= opts.tolerance) break;
    const Eigen::MatrixXd jac = problem.jacobian(u, opts.fd_step);
    bool accepted = false;
    double previous = cost;
    while (lambda <= 1e16) {
      const Eigen::VectorXd delta = damped_step(jac, r, lambda);
      if (delta.allFinite()) {
        const Eigen::VectorXd trial = u + delta;
        const Eigen::VectorXd r_trial = problem.residual(trial);
        const double c_trial = r_trial.allFinite() ? r_trial.squaredNorm() : std::numeric_limits<double>::infinity();
        if (c_trial < cost) {
          u = trial;
          r = r_trial;
          cost = c_trial;
          lambda = std::max(lambda / 10.0, 1e-15);
          accepted = true;
          break;
        }
      }
      lambda *= 10.0;
    }
    if (!accepted || std::sqrt(previous) - std::sqrt(cost) < 1e-14) {
      out.stalled = std::sqrt(cost) > opts.tolerance;
      ++it;
      break;
    }
  }
  out.u = std::move(u);
  out.residual = std::sqrt(cost);
  out.iterations = it;
  return out;
}

Eigen::VectorXd random_start(Eigen::Index size, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  Eigen::VectorXd u(size);
  for (Eigen::Index k = 0; k < size; ++k) u[k] = scale * (2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0);
  return u;
}

struct MultiStartOutcome {
  SolveOutcome best;
  int best_start = 0;
};

MultiStartOutcome multi_start(const ShootingProblem& problem, const Eigen::VectorXd& first, const SteerOptions& opts) {
  MultiStartOutcome out;
  for (int s = 0; s < std::max(1, opts.starts); ++s) {
    Eigen::VectorXd init = s == 0 ? first : random_start(problem.num_params(), opts.seed + s, opts.start_scale);
    SolveOutcome run = gauss_newton(problem, std::move(init), opts, opts.max_iterations);
    if (run.residual < out.best.residual) {
      out.best = std::move(run);
      out.best_start = s;
    }
    if (out.best.residual <= opts.tolerance) break;
  }
  return out;
}

ControlSchedule schedule_from(const ShootingProblem& problem, const Eigen::VectorXd& u, int segments, double t0,
                              double horizon) {
  ControlSchedule out;
  for (int s = 0; s <= segments; ++s) out.grid.push_back(s == segments ? t0 + horizon : t0 + horizon * s / segments);
  for (int s = 0; s < segments; ++s) out.values.push_back(problem.controls(u, s));
  return out;
}

void check_shapes(const Digraph& g, const Configuration& a, const Configuration& b) {
  if (a.num_agents() != g.num_vertices() || b.num_agents() != g.num_vertices() || a.dim() != b.dim()) {
    throw Error(ErrorCode::SizeMismatch, "configurations and graph disagree on shape");
  }
}

// Steers `state` from the straight segment a -> b over [t0, t1], appending the
// controls to `out` and advancing `state`. When the sampled excursion from the
// segment exceeds epsilon / 2 the span is cut into pieces and re-planned, up to
// options.max_refinements levels deep. Returns the endpoint residual.
double track_leg(const Digraph& g, Eigen::MatrixXd& state, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                 double t0, double t1, double epsilon, const TrackOptions& options, int depth, ControlSchedule& out) {
  const int targets = options.segments_per_leg;
  const double span = t1 - t0;
  // Sparse graphs get several constant pieces per target so that each target
  // has more parameters than equations.
  const int equations = static_cast<int>(a.size());
  const int ratio = std::max<int>(1, equations / std::max<int>(1, static_cast<int>(g.num_edges())) + 1);
  const int m = targets * ratio;

  // Stage one follows the segment through intermediate targets; stage two
  // closes the endpoint gap starting from there.
  std::vector<Target> path_targets;
  for (int s = 1; s <= targets; ++s) {
    const double frac = static_cast<double>(s) / targets;
    path_targets.push_back({s * ratio, a + frac * (b - a), 1.0});
  }
  ShootingProblem follow(g, state, m, span / m, std::move(path_targets));
  // Endpoint errors do not accumulate since every piece re-plans from the
  // state it reached, so a tolerance far below epsilon suffices.
  SteerOptions solver = options.steer;
  solver.tolerance = std::max(solver.tolerance, 1e-6 * epsilon);
  SolveOutcome guided = gauss_newton(follow, Eigen::VectorXd::Zero(follow.num_params()), solver,
                                     std::min(50, solver.max_iterations));
  ShootingProblem reach(g, state, m, span / m, {Target{m, b, 1.0}});
  auto outcome = multi_start(reach, guided.u, solver);

  // Excursions of a driftless system shrink at least like the square root of
  // the span when second-order brackets suffice; the piece count aims there.
  const double budget = 0.5 * epsilon;
  const double excursion = reach.excursion(outcome.best.u, a, b, 8);
  if (depth < options.max_refinements && excursion > budget) {
    const double ratio_sq = (excursion / budget) * (excursion / budget);
    const int pieces = std::clamp(static_cast<int>(std::ceil(1.5 * ratio_sq)), 2, 64);
    double residual = 0.0;
    for (int p = 0; p < pieces; ++p) {
      const double f0 = static_cast<double>(p) / pieces, f1 = static_cast<double>(p + 1) / pieces;
      const Eigen::MatrixXd pa = a + f0 * (b - a);
      const Eigen::MatrixXd pb = p + 1 == pieces ? b : Eigen::MatrixXd(a + f1 * (b - a));
      const double ta = t0 + f0 * span, tb = p + 1 == pieces ? t1 : t0 + f1 * span;
      residual = track_leg(g, state, pa, pb, ta, tb, epsilon, options, depth + 1, out);
    }
    return residual;
  }

  ControlSchedule leg = schedule_from(reach, outcome.best.u, m, t0, span);
  leg.grid.back() = t1;
  for (int s = 1; s <= m; ++s) out.grid.push_back(leg.grid[s]);
  for (auto& v : leg.values) out.values.push_back(std::move(v));
  std::vector<Eigen::MatrixXd> states, propagators;
  reach.forward(outcome.best.u, states, propagators);
  state = states.back();
  return outcome.best.residual;
}

}  // namespace

SteerResult steer(const Digraph& g, const Configuration& p0, const Configuration& p1, int segments, double horizon,
                  const SteerOptions& options) {
  check_shapes(g, p0, p1);
  if (segments < 2) throw Error(ErrorCode::InvalidArgument, "steering needs at least 2 segments");
  if (!(horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");

  SteerResult result;
  if (!larc_passes(p0, g)) result.warnings.push_back("initial configuration fails the rank condition");
  if (!larc_passes(p1, g)) result.warnings.push_back("target configuration fails the rank condition");

  ShootingProblem problem(g, p0.agent_matrix(), segments, horizon / segments,
                          {Target{segments, p1.agent_matrix(), 1.0}});
  auto outcome = multi_start(problem, Eigen::VectorXd::Zero(problem.num_params()), options);
  result.schedule = schedule_from(problem, outcome.best.u, segments, 0.0, horizon);
  result.residual = outcome.best.residual;
  result.best_start = outcome.best_start;
  result.iterations = outcome.best.iterations;
  result.no_progress = outcome.best.stalled;
  if (result.no_progress) result.warnings.push_back("no progress: residual stalled above tolerance");
  return result;
}

Configuration interpolate_waypoints(const std::vector<Waypoint>& waypoints, double t) {
  if (waypoints.empty()) throw Error(ErrorCode::EmptyInput, "no waypoints");
  if (t <= waypoints.front().t) return waypoints.front().p;
  if (t >= waypoints.back().t) return waypoints.back().p;
  std::size_t k = 0;
  while (waypoints[k + 1].t < t) ++k;
  const auto& a = waypoints[k];
  const auto& b = waypoints[k + 1];
  const double s = (t - a.t) / (b.t - a.t);
  return Configuration(a.p.dim(), a.p.num_agents(), a.p.coords() + s * (b.p.coords() - a.p.coords()));
}

TrackResult track_path(const GraphSchedule& schedule, const std::vector<Waypoint>& waypoints, double epsilon,
                       const TrackOptions& options) {
  if (waypoints.empty()) throw Error(ErrorCode::EmptyInput, "no waypoints");
  return track_path(schedule, waypoints, epsilon, waypoints.front().p, options);
}

TrackResult track_path(const GraphSchedule& schedule, const std::vector<Waypoint>& waypoints, double epsilon,
                       const Configuration& start, const TrackOptions& options) {
  if (waypoints.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two waypoints");
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  if (options.segments_per_leg < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 segments per leg");
  const double slack = 1e-12 * std::max(1.0, schedule.horizon());
  const int n = start.dim();
  if (waypoints.front().t != 0.0) throw Error(ErrorCode::InvalidArgument, "first waypoint must be at t = 0");
  for (std::size_t k = 0; k < waypoints.size(); ++k) {
    const auto& w = waypoints[k];
    if (w.p.num_agents() != schedule.num_vertices() || w.p.dim() != n) {
      throw Error(ErrorCode::SizeMismatch, "waypoint " + std::to_string(k + 1) + " has the wrong shape");
    }
    if (k > 0 && !(w.t > waypoints[k - 1].t)) throw Error(ErrorCode::InvalidArgument, "waypoint times must increase");
  }
  const double end = waypoints.back().t;
  if (end > schedule.horizon() + slack) throw Error(ErrorCode::InvalidArgument, "waypoints extend past the horizon");
  for (double s : schedule.switching_times()) {
    if (s >= end - slack) break;
    bool hit = std::any_of(waypoints.begin(), waypoints.end(), [&](const Waypoint& w) { return std::abs(w.t - s) <= slack; });
    if (!hit) throw Error(ErrorCode::InconsistentSchedule, "switching time " + std::to_string(s) + " is not a waypoint time");
  }
  if ((start.coords() - waypoints.front().p.coords()).norm() >= epsilon) {
    throw Error(ErrorCode::InvalidArgument, "start is not within epsilon of the first waypoint");
  }

  // Plan-time check that every graph in use is generically controllable.
  std::vector<GraphSchedule::Segment> used;
  for (const auto& seg : schedule.segments()) {
    if (seg.start >= end - slack && !used.empty()) break;
    const auto verdict = structural_verdict(seg.graph, n);
    if (verdict.kind != VerdictKind::GenericallyControllable) {
      throw Error(ErrorCode::StructuralFailure,
                  std::string("graph starting at t = ") + std::to_string(seg.start) + " is " + to_string(verdict.kind));
    }
    used.push_back(seg);
  }
  const GraphSchedule active_schedule(used, end);

  TrackResult result;
  double scale = 1.0;
  for (const auto& w : waypoints) scale = std::max(scale, w.p.coords().cwiseAbs().maxCoeff());
  for (std::size_t k = 0; k + 1 < waypoints.size(); ++k) {
    if ((waypoints[k + 1].p.coords() - waypoints[k].p.coords()).norm() > 0.5 * scale) {
      result.warnings.push_back("waypoints " + std::to_string(k + 1) + " and " + std::to_string(k + 2) +
                                " are far apart");
    }
  }

  result.schedule.grid.push_back(0.0);
  Eigen::MatrixXd state = start.agent_matrix();
  for (std::size_t k = 0; k + 1 < waypoints.size(); ++k) {
    const auto& a = waypoints[k];
    const auto& b = waypoints[k + 1];
    const Digraph& g = active_schedule.active(a.t + slack);
    const double residual =
        track_leg(g, state, a.p.agent_matrix(), b.p.agent_matrix(), a.t, b.t, epsilon, options, 0, result.schedule);
    result.leg_residuals.push_back(residual);
    if (residual > 0.5 * epsilon) {
      throw Error(ErrorCode::SegmentFailure, "leg " + std::to_string(k + 1) + " (t = " + std::to_string(a.t) + " to " +
                                                 std::to_string(b.t) + ") residual " + std::to_string(residual) +
                                                 " exceeds epsilon/2");
    }
  }

  double shortest = end;
  for (std::size_t k = 0; k + 1 < result.schedule.grid.size(); ++k)
    shortest = std::min(shortest, result.schedule.grid[k + 1] - result.schedule.grid[k]);
  const double dt = std::min(options.dt > 0.0 ? options.dt : end / 400.0, shortest);
  result.trajectory = simulate(active_schedule, result.schedule, start, dt);
  for (std::size_t s = 0; s < result.trajectory.times.size(); ++s) {
    const Configuration ref = interpolate_waypoints(waypoints, result.trajectory.times[s]);
    result.max_deviation = std::max(result.max_deviation, (result.trajectory.states[s].coords() - ref.coords()).norm());
  }
  return result;
}

}  // namespace formctl
