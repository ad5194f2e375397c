#pragma once

#include <compare>
#include <cstddef>
#include <vector>

namespace formctl {

/// Directed edge `from -> to` between 0-based vertex indices.
struct Edge {
  int from = 0;
  int to = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Immutable directed graph on vertices 0..N-1.
///
/// Edges are kept sorted lexicographically and deduplicated. Self-loops and
/// out-of-range endpoints are rejected with ErrorCode::InvalidGraph.
class Digraph {
 public:
  Digraph() = default;
  Digraph(int num_vertices, std::vector<Edge> edges);

  static Digraph complete(int num_vertices);
  static Digraph cycle(int num_vertices);
  static Digraph path(int num_vertices);

  int num_vertices() const noexcept { return num_vertices_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<int>& out_neighbors(int v) const { return out_[v]; }
  bool has_edge(int from, int to) const;

  /// Graph with vertex v renamed to perm[v].
  Digraph relabeled(const std::vector<int>& perm) const;

  friend bool operator==(const Digraph& a, const Digraph& b) {
    return a.num_vertices_ == b.num_vertices_ && a.edges_ == b.edges_;
  }

 private:
  int num_vertices_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> out_;
};

/// Coarse strong component decomposition together with its skeleton.
///
/// Components are numbered by their smallest member vertex and each member
/// list is sorted ascending.
struct ScdReport {
  std::vector<std::vector<int>> components;
  std::vector<int> component_of;  // vertex -> component index
  Digraph skeleton;               // acyclic, one vertex per component
  std::vector<int> maximal_set;   // skeleton vertices without out-edges, ascending

  std::size_t num_components() const noexcept { return components.size(); }
  std::vector<int> component_sizes() const;
  bool is_maximal(int component) const;
};

enum class VerdictKind { GenericallyControllable, QEmpty, QDisconnected };

struct StructuralVerdict {
  VerdictKind kind = VerdictKind::GenericallyControllable;
  std::vector<int> offending_components;  // maximal components with size <= n+1
};

const char* to_string(VerdictKind kind) noexcept;

/// True iff the undirected shadow is connected. A single vertex counts as connected.
bool is_weakly_connected(const Digraph& g);

/// Strongly connected components as a vertex -> component map plus the
/// component count, for any graph (weak connectivity not required).
/// Labels follow smallest-member order.
std::vector<int> strong_component_labels(const Digraph& g, int* num_components = nullptr);

/// Throws NotWeaklyConnected when `g` is not weakly connected.
ScdReport coarse_scd(const Digraph& g);

/// Edge i->j iff j is reachable from i by a nonempty path and i != j.
Digraph transitive_closure(const Digraph& g);

/// Checks that the coarse SCD of the closure has the same partition with
/// complete components and that its skeleton is the closure of the skeleton.
bool verify_scd_closure_commutation(const Digraph& g);

/// Classifies the graph for ambient dimension n by the sizes of its maximal components.
StructuralVerdict structural_verdict(const Digraph& g, int n);

}  // namespace formctl
