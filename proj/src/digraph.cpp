#include "formctl/digraph.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "formctl/errors.hpp"

namespace formctl {

Digraph::Digraph(int num_vertices, std::vector<Edge> edges) : num_vertices_(num_vertices) {
  if (num_vertices <= 0) {
    throw Error(ErrorCode::InvalidGraph, "vertex count must be positive");
  }
  for (const Edge& e : edges) {
    if (e.from < 0 || e.from >= num_vertices || e.to < 0 || e.to >= num_vertices) {
      throw Error(ErrorCode::InvalidGraph, "edge endpoint out of range: " +
                                               std::to_string(e.from + 1) + " -> " +
                                               std::to_string(e.to + 1));
    }
    if (e.from == e.to) {
      throw Error(ErrorCode::InvalidGraph, "self-loop at vertex " + std::to_string(e.from + 1));
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);
  out_.assign(num_vertices, {});
  for (const Edge& e : edges_) out_[e.from].push_back(e.to);
}

Digraph Digraph::complete(int num_vertices) {
  std::vector<Edge> edges;
  for (int i = 0; i < num_vertices; ++i)
    for (int j = 0; j < num_vertices; ++j)
      if (i != j) edges.push_back({i, j});
  return Digraph(num_vertices, std::move(edges));
}

Digraph Digraph::cycle(int num_vertices) {
  std::vector<Edge> edges;
  if (num_vertices > 1)
    for (int i = 0; i < num_vertices; ++i) edges.push_back({i, (i + 1) % num_vertices});
  return Digraph(num_vertices, std::move(edges));
}

Digraph Digraph::path(int num_vertices) {
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < num_vertices; ++i) edges.push_back({i, i + 1});
  return Digraph(num_vertices, std::move(edges));
}

bool Digraph::has_edge(int from, int to) const {
  return std::binary_search(edges_.begin(), edges_.end(), Edge{from, to});
}

Digraph Digraph::relabeled(const std::vector<int>& perm) const {
  if (static_cast<int>(perm.size()) != num_vertices_) {
    throw Error(ErrorCode::SizeMismatch, "permutation size differs from vertex count");
  }
  std::vector<Edge> edges;
  edges.reserve(edges_.size());
  for (const Edge& e : edges_) edges.push_back({perm[e.from], perm[e.to]});
  return Digraph(num_vertices_, std::move(edges));
}

std::vector<int> ScdReport::component_sizes() const {
  std::vector<int> sizes;
  sizes.reserve(components.size());
  for (const auto& c : components) sizes.push_back(static_cast<int>(c.size()));
  return sizes;
}

bool ScdReport::is_maximal(int component) const {
  return std::binary_search(maximal_set.begin(), maximal_set.end(), component);
}

const char* to_string(VerdictKind kind) noexcept {
  switch (kind) {
    case VerdictKind::GenericallyControllable: return "GenericallyControllable";
    case VerdictKind::QEmpty: return "QEmpty";
    case VerdictKind::QDisconnected: return "QDisconnected";
  }
  return "Unknown";
}

bool is_weakly_connected(const Digraph& g) {
  const int n = g.num_vertices();
  std::vector<std::vector<int>> undirected(n);
  for (const Edge& e : g.edges()) {
    undirected[e.from].push_back(e.to);
    undirected[e.to].push_back(e.from);
  }
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int visited = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : undirected[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++visited;
        stack.push_back(w);
      }
    }
  }
  return visited == n;
}

std::vector<int> strong_component_labels(const Digraph& g, int* num_components) {
  // Iterative Tarjan.
  const int n = g.num_vertices();
  std::vector<int> index(n, -1), lowlink(n, 0), raw_label(n, -1);
  std::vector<char> on_stack(n, 0);
  std::vector<int> stack;
  int next_index = 0;
  int raw_count = 0;

  struct Frame {
    int vertex;
    std::size_t next_child;
  };
  std::vector<Frame> call;

  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    call.push_back({root, 0});
    index[root] = lowlink[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;

    while (!call.empty()) {
      Frame& frame = call.back();
      const int v = frame.vertex;
      const auto& succ = g.out_neighbors(v);
      if (frame.next_child < succ.size()) {
        int w = succ[frame.next_child++];
        if (index[w] == -1) {
          index[w] = lowlink[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          lowlink[v] = std::min(lowlink[v], index[w]);
        }
        continue;
      }
      if (lowlink[v] == index[v]) {
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          raw_label[w] = raw_count;
        } while (w != v);
        ++raw_count;
      }
      call.pop_back();
      if (!call.empty()) {
        int parent = call.back().vertex;
        lowlink[parent] = std::min(lowlink[parent], lowlink[v]);
      }
    }
  }

  // Relabel by smallest member vertex.
  std::vector<int> remap(raw_count, -1);
  int count = 0;
  std::vector<int> labels(n);
  for (int v = 0; v < n; ++v) {
    if (remap[raw_label[v]] == -1) remap[raw_label[v]] = count++;
    labels[v] = remap[raw_label[v]];
  }
  if (num_components) *num_components = count;
  return labels;
}

ScdReport coarse_scd(const Digraph& g) {
  if (!is_weakly_connected(g)) {
    throw Error(ErrorCode::NotWeaklyConnected, "graph is not weakly connected");
  }
  ScdReport report;
  int q = 0;
  report.component_of = strong_component_labels(g, &q);
  report.components.assign(q, {});
  for (int v = 0; v < g.num_vertices(); ++v) report.components[report.component_of[v]].push_back(v);

  std::vector<Edge> skeleton_edges;
  for (const Edge& e : g.edges()) {
    int a = report.component_of[e.from];
    int b = report.component_of[e.to];
    if (a != b) skeleton_edges.push_back({a, b});
  }
  report.skeleton = Digraph(q, std::move(skeleton_edges));
  for (int c = 0; c < q; ++c) {
    if (report.skeleton.out_neighbors(c).empty()) report.maximal_set.push_back(c);
  }
  return report;
}

namespace {

// Reachability among components of an acyclic condensation; reach[c][d] is
// true iff d is reachable from c by a path of length >= 0.
std::vector<std::vector<char>> condensation_reach(const Digraph& skeleton) {
  const int q = skeleton.num_vertices();
  // Topological order by DFS finishing times.
  std::vector<int> order;
  order.reserve(q);
  std::vector<char> state(q, 0);
  for (int root = 0; root < q; ++root) {
    if (state[root]) continue;
    std::vector<std::pair<int, std::size_t>> call{{root, 0}};
    state[root] = 1;
    while (!call.empty()) {
      auto& [v, next] = call.back();
      const auto& succ = skeleton.out_neighbors(v);
      if (next < succ.size()) {
        int w = succ[next++];
        if (!state[w]) {
          state[w] = 1;
          call.push_back({w, 0});
        }
        continue;
      }
      order.push_back(v);
      call.pop_back();
    }
  }
  // `order` lists sinks first, so successors are complete before their predecessors.
  std::vector<std::vector<char>> reach(q, std::vector<char>(q, 0));
  for (int v : order) {
    reach[v][v] = 1;
    for (int w : skeleton.out_neighbors(v))
      for (int d = 0; d < q; ++d)
        if (reach[w][d]) reach[v][d] = 1;
  }
  return reach;
}

}  // namespace

Digraph transitive_closure(const Digraph& g) {
  int q = 0;
  std::vector<int> label = strong_component_labels(g, &q);
  std::vector<std::vector<int>> members(q);
  for (int v = 0; v < g.num_vertices(); ++v) members[label[v]].push_back(v);

  std::vector<Edge> condensed;
  for (const Edge& e : g.edges())
    if (label[e.from] != label[e.to]) condensed.push_back({label[e.from], label[e.to]});
  Digraph skeleton(q, std::move(condensed));
  auto reach = condensation_reach(skeleton);

  std::vector<Edge> edges;
  for (int c = 0; c < q; ++c) {
    // Inside a component every vertex reaches every other one.
    for (int d = 0; d < q; ++d) {
      if (!reach[c][d]) continue;
      for (int i : members[c])
        for (int j : members[d])
          if (i != j) edges.push_back({i, j});
    }
  }
  return Digraph(g.num_vertices(), std::move(edges));
}

bool verify_scd_closure_commutation(const Digraph& g) {
  ScdReport base = coarse_scd(g);
  Digraph closure = transitive_closure(g);
  ScdReport closed = coarse_scd(closure);

  if (closed.components != base.components) return false;
  for (const auto& comp : closed.components)
    for (int i : comp)
      for (int j : comp)
        if (i != j && !closure.has_edge(i, j)) return false;
  return closed.skeleton == transitive_closure(base.skeleton);
}

StructuralVerdict structural_verdict(const Digraph& g, int n) {
  if (n <= 0) throw Error(ErrorCode::InvalidArgument, "ambient dimension must be positive");
  ScdReport scd = coarse_scd(g);
  StructuralVerdict verdict;
  bool any_empty = false;
  bool any_boundary = false;
  for (int c : scd.maximal_set) {
    const int size = static_cast<int>(scd.components[c].size());
    if (size <= n) {
      any_empty = true;
      verdict.offending_components.push_back(c);
    } else if (size == n + 1) {
      any_boundary = true;
      verdict.offending_components.push_back(c);
    }
  }
  if (any_empty) {
    verdict.kind = VerdictKind::QEmpty;
  } else if (any_boundary) {
    verdict.kind = VerdictKind::QDisconnected;
  } else {
    verdict.kind = VerdictKind::GenericallyControllable;
  }
  return verdict;
}

}  // namespace formctl
