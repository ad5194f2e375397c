#include "formctl/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "formctl/errors.hpp"

namespace formctl::io {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(s);
  while (std::getline(in, field, sep)) out.push_back(trim(field));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_number(const std::string& field, const std::string& where) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) parse_fail(where + ": not a number: '" + field + "'");
  if (!std::isfinite(value)) parse_fail(where + ": non-finite value");
  return value;
}

int parse_int(const std::string& field, const std::string& where) {
  int value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) parse_fail(where + ": not an integer: '" + field + "'");
  return value;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    parse_fail(std::string("malformed JSON: ") + e.what());
  }
}

double json_number(const json& v, const std::string& where) {
  if (!v.is_number()) parse_fail(where + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) parse_fail(where + ": non-finite value");
  return x;
}

Eigen::MatrixXd agent_rows(const json& agents, const std::string& where) {
  if (!agents.is_array() || agents.empty()) parse_fail(where + ": 'agents' must be a nonempty array");
  const std::size_t dim = agents.front().is_array() ? agents.front().size() : 0;
  if (dim == 0) parse_fail(where + ": agents must be nonempty arrays");
  Eigen::MatrixXd rows(agents.size(), dim);
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (!agents[i].is_array() || agents[i].size() != dim) {
      parse_fail(where + ": agent " + std::to_string(i + 1) + " has the wrong length");
    }
    for (std::size_t c = 0; c < dim; ++c) {
      rows(i, c) = json_number(agents[i][c], where + ": agent " + std::to_string(i + 1));
    }
  }
  return rows;
}

json agents_json(const Configuration& p) {
  json agents = json::array();
  for (int i = 0; i < p.num_agents(); ++i) {
    json row = json::array();
    const Eigen::VectorXd x = p.agent(i);
    for (int c = 0; c < p.dim(); ++c) row.push_back(x[c]);
    agents.push_back(std::move(row));
  }
  return agents;
}

// nlohmann prints doubles in shortest round-trip form; that meets the 17-digit
// requirement, so only the CSV writers format by hand.
std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

Digraph parse_graph(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  int num_vertices = -1;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = "graph line " + std::to_string(line_no);
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    std::istringstream fields(body);
    std::string a, b, extra;
    fields >> a >> b;
    if (b.empty() || (fields >> extra)) parse_fail(where + ": expected two fields");
    if (num_vertices < 0) {
      if (a != "N") parse_fail(where + ": expected 'N <num_vertices>'");
      num_vertices = parse_int(b, where);
      if (num_vertices <= 0) parse_fail(where + ": vertex count must be positive");
      continue;
    }
    const int i = parse_int(a, where);
    const int j = parse_int(b, where);
    if (i < 1 || i > num_vertices || j < 1 || j > num_vertices) parse_fail(where + ": vertex out of range");
    if (i == j) parse_fail(where + ": self-loop");
    edges.push_back({i - 1, j - 1});
  }
  if (num_vertices < 0) parse_fail("graph: missing 'N <num_vertices>' header");
  return Digraph(num_vertices, std::move(edges));
}

std::string format_graph(const Digraph& g) {
  std::string out = "N " + std::to_string(g.num_vertices()) + "\n";
  for (const auto& e : g.edges()) out += std::to_string(e.from + 1) + " " + std::to_string(e.to + 1) + "\n";
  return out;
}

Digraph read_graph(const std::string& path) { return parse_graph(read_file(path)); }

Configuration parse_configuration_json(const std::string& text) {
  const json j = parse_json(text);
  if (!j.is_object() || !j.contains("agents")) parse_fail("configuration: expected an object with 'agents'");
  const Eigen::MatrixXd rows = agent_rows(j["agents"], "configuration");
  if (j.contains("n") && (!j["n"].is_number_integer() || j["n"].get<long>() != rows.cols())) {
    parse_fail("configuration: 'n' disagrees with the agent coordinates");
  }
  if (j.contains("N") && (!j["N"].is_number_integer() || j["N"].get<long>() != rows.rows())) {
    parse_fail("configuration: 'N' disagrees with the number of agents");
  }
  return Configuration::from_agents(rows);
}

Configuration parse_configuration_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::vector<double> row;
    for (const auto& field : split(body, ',')) row.push_back(parse_number(field, "configuration line " + std::to_string(line_no)));
    if (!rows.empty() && row.size() != rows.front().size()) {
      parse_fail("configuration line " + std::to_string(line_no) + ": wrong number of coordinates");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) parse_fail("configuration: no agents");
  return Configuration::from_agents(rows);
}

std::string configuration_json(const Configuration& p) {
  json j;
  j["n"] = p.dim();
  j["N"] = p.num_agents();
  j["agents"] = agents_json(p);
  return dump(j);
}

std::string configuration_csv(const Configuration& p) {
  std::string out;
  for (int i = 0; i < p.num_agents(); ++i) {
    const Eigen::VectorXd x = p.agent(i);
    for (int c = 0; c < p.dim(); ++c) out += (c ? "," : "") + format_double(x[c]);
    out += "\n";
  }
  return out;
}

Configuration read_configuration(const std::string& path) {
  const std::string text = read_file(path);
  if (std::filesystem::path(path).extension() == ".csv") return parse_configuration_csv(text);
  return parse_configuration_json(text);
}

std::string format_lie_basis(const LieBasis& basis) {
  std::string out = "dim " + std::to_string(basis.dimension()) + "\n";
  for (const auto& m : basis.elements()) {
    out += "\n";
    for (int r = 0; r < m.size(); ++r) {
      for (int c = 0; c < m.size(); ++c) out += (c ? " " : "") + std::to_string(m(r, c));
      out += "\n";
    }
  }
  return out;
}

std::string larc_report_json(const LarcReport& report) {
  json j;
  j["dim"] = report.dim;
  j["required"] = report.required;
  j["passes"] = report.passes;
  j["per_agent"] = report.per_agent_ranks;
  j["closure_edges"] = report.closure_edges;
  if (report.slow_path_dim) j["slow_path_dim"] = *report.slow_path_dim;
  if (report.bracket_path_dim) j["bracket_path_dim"] = *report.bracket_path_dim;
  return dump(j);
}

std::string witness_csv(const WitnessBasis& basis) {
  std::string out;
  if (basis.vectors.empty()) return out;
  for (Eigen::Index k = 0; k < basis.vectors.front().size(); ++k) out += "v" + std::to_string(k + 1) + ",";
  out += "label\n";
  for (std::size_t r = 0; r < basis.vectors.size(); ++r) {
    for (double x : basis.vectors[r]) out += format_double(x) + ",";
    out += to_string(basis.labels[r]) + "\n";
  }
  return out;
}

GraphSchedule parse_graph_schedule(const std::string& text, double horizon, const std::string& base_dir) {
  const json j = parse_json(text);
  if (!j.is_array() || j.empty()) parse_fail("schedule: expected a nonempty array");
  std::vector<GraphSchedule::Segment> segments;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string where = "schedule entry " + std::to_string(k + 1);
    const json& entry = j[k];
    if (!entry.is_object() || !entry.contains("t") || !entry.contains("graph") || !entry["graph"].is_string()) {
      parse_fail(where + ": expected {\"t\": number, \"graph\": string}");
    }
    const double t = json_number(entry["t"], where);
    std::string spec = entry["graph"].get<std::string>();
    const std::string head = trim(spec);
    Digraph g;
    if (head.rfind("N ", 0) == 0 || head.rfind("N\t", 0) == 0) {
      for (char& ch : spec)
        if (ch == ';') ch = '\n';
      g = parse_graph(spec);
    } else {
      std::filesystem::path path(head);
      if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
      g = read_graph(path.string());
    }
    segments.push_back({t, std::move(g)});
  }
  try {
    return GraphSchedule(std::move(segments), horizon);
  } catch (const Error& e) {
    parse_fail(std::string("schedule: ") + e.what());
  }
}

GraphSchedule read_graph_schedule(const std::string& path, double horizon) {
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_graph_schedule(read_file(path), horizon, dir.empty() ? "." : dir.string());
}

ControlSchedule parse_control_schedule(const std::string& text) {
  struct Row {
    double t0, t1;
    Edge edge;
    double u;
  };
  std::istringstream in(text);
  std::string line;
  std::vector<Row> rows;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto fields = split(body, ',');
    if (fields.size() != 5) parse_fail("controls line " + std::to_string(line_no) + ": expected 5 columns");
    if (fields[0] == "t_start") continue;
    const std::string where = "controls line " + std::to_string(line_no);
    Row r{parse_number(fields[0], where), parse_number(fields[1], where),
          Edge{parse_int(fields[2], where) - 1, parse_int(fields[3], where) - 1}, parse_number(fields[4], where)};
    if (!(r.t1 > r.t0)) parse_fail(where + ": empty interval");
    if (r.edge.from < 0 || r.edge.to < 0) parse_fail(where + ": vertex numbers start at 1");
    rows.push_back(r);
  }
  if (rows.empty()) parse_fail("controls: no rows");
  std::set<double> points;
  for (const auto& r : rows) {
    points.insert(r.t0);
    points.insert(r.t1);
  }
  ControlSchedule out;
  out.grid.assign(points.begin(), points.end());
  out.values.resize(out.grid.size() - 1);
  for (const auto& r : rows) {
    const auto k = static_cast<std::size_t>(std::lower_bound(out.grid.begin(), out.grid.end(), r.t0) - out.grid.begin());
    if (out.grid[k + 1] != r.t1) parse_fail("controls: interval [" + format_double(r.t0) + ", " + format_double(r.t1) + "] overlaps another breakpoint");
    if (!out.values[k].emplace(r.edge, r.u).second) parse_fail("controls: edge repeated within an interval");
  }
  return out;
}

std::string control_schedule_csv(const ControlSchedule& schedule) {
  std::string out = "t_start,t_end,i,j,u\n";
  for (std::size_t k = 0; k < schedule.values.size(); ++k) {
    for (const auto& [edge, u] : schedule.values[k]) {
      out += format_double(schedule.grid[k]) + "," + format_double(schedule.grid[k + 1]) + "," +
             std::to_string(edge.from + 1) + "," + std::to_string(edge.to + 1) + "," + format_double(u) + "\n";
    }
  }
  return out;
}

ControlSchedule read_control_schedule(const std::string& path) { return parse_control_schedule(read_file(path)); }

std::string trajectory_csv(const Trajectory& trajectory) {
  std::string out = "t,agent";
  const int dim = trajectory.states.empty() ? 0 : trajectory.states.front().dim();
  for (int c = 0; c < dim; ++c) out += ",x" + std::to_string(c + 1);
  out += "\n";
  for (std::size_t s = 0; s < trajectory.times.size(); ++s) {
    const auto& p = trajectory.states[s];
    const std::string t = format_double(trajectory.times[s]);
    for (int i = 0; i < p.num_agents(); ++i) {
      out += t + "," + std::to_string(i + 1);
      for (int c = 0; c < dim; ++c) out += "," + format_double(p.coords()[coordinate_major_index(i, c, p.num_agents())]);
      out += "\n";
    }
  }
  return out;
}

std::vector<Waypoint> parse_waypoints(const std::string& text) {
  const json j = parse_json(text);
  if (!j.is_array() || j.empty()) parse_fail("waypoints: expected a nonempty array");
  std::vector<Waypoint> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string where = "waypoint " + std::to_string(k + 1);
    if (!j[k].is_object() || !j[k].contains("t") || !j[k].contains("agents")) {
      parse_fail(where + ": expected {\"t\": number, \"agents\": [...]}");
    }
    out.push_back({json_number(j[k]["t"], where), Configuration::from_agents(agent_rows(j[k]["agents"], where))});
  }
  return out;
}

std::vector<Waypoint> read_waypoints(const std::string& path) { return parse_waypoints(read_file(path)); }

}  // namespace formctl::io
