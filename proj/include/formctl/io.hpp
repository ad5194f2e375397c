#pragma once

#include <string>
#include <vector>

#include "formctl/configspace.hpp"
#include "formctl/digraph.hpp"
#include "formctl/dynamics.hpp"
#include "formctl/larc.hpp"
#include "formctl/liealg.hpp"
#include "formctl/steering.hpp"

// Text formats use 1-based vertex and agent numbers. Parse failures throw
// ParseError, unreadable files IoError.
namespace formctl::io {

/// Shortest round-trip decimal form, 17 significant digits.
std::string format_double(double x);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// "N <count>" then one "i j" line per edge; '#' starts a comment.
Digraph parse_graph(const std::string& text);
std::string format_graph(const Digraph& g);
Digraph read_graph(const std::string& path);

/// {"n": n, "N": N, "agents": [[...], ...]}, rows are agents.
Configuration parse_configuration_json(const std::string& text);
/// One agent per row, comma-separated coordinates.
Configuration parse_configuration_csv(const std::string& text);
std::string configuration_json(const Configuration& p);
std::string configuration_csv(const Configuration& p);
/// CSV when the path ends in .csv, JSON otherwise.
Configuration read_configuration(const std::string& path);

/// "dim <d>" followed by the basis matrices, rows on lines, blank line between matrices.
std::string format_lie_basis(const LieBasis& basis);

std::string larc_report_json(const LarcReport& report);
/// One vector per row (coordinate-major) with the label in the last column.
std::string witness_csv(const WitnessBasis& basis);

/// [{"t": start, "graph": "<path or inline edge list>"}, ...]; relative paths
/// resolve against `base_dir`. Inline lists separate lines with ';' or newlines.
GraphSchedule parse_graph_schedule(const std::string& text, double horizon, const std::string& base_dir = ".");
GraphSchedule read_graph_schedule(const std::string& path, double horizon);

/// Columns t_start,t_end,i,j,u. Breakpoints are the union of all interval ends;
/// intervals without rows carry zero control.
ControlSchedule parse_control_schedule(const std::string& text);
std::string control_schedule_csv(const ControlSchedule& schedule);
ControlSchedule read_control_schedule(const std::string& path);

/// Columns t,agent,x1..xn; one row per agent and sample.
std::string trajectory_csv(const Trajectory& trajectory);

/// [{"t": t, "agents": [[...], ...]}, ...]
std::vector<Waypoint> parse_waypoints(const std::string& text);
std::vector<Waypoint> read_waypoints(const std::string& path);

}  // namespace formctl::io
