#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "formctl/digraph.hpp"

namespace formctl {

/// Relative singular-value threshold: sigma counts as zero iff sigma <= tau * sigma_max.
inline constexpr double kDefaultRankTolerance = 1e-9;

/// Singular values above tau * max(sigma_max, floor). A positive floor keeps
/// round-off-sized matrices at rank 0.
int numeric_rank(const Eigen::MatrixXd& m, double tau = kDefaultRankTolerance, double floor = 0.0);

/// Orthonormal basis of the column space (numerically nonzero directions only).
Eigen::MatrixXd orthonormal_column_basis(const Eigen::MatrixXd& m, double tau = kDefaultRankTolerance);

/// N agents in R^n, stored coordinate-major: coords[c * N + i] is coordinate c of agent i.
class Configuration {
 public:
  Configuration() = default;
  Configuration(int dim, int num_agents, Eigen::VectorXd coordinate_major);

  /// Rows are agents.
  static Configuration from_agents(const Eigen::MatrixXd& agents);
  static Configuration from_agents(const std::vector<std::vector<double>>& agents);

  int dim() const noexcept { return dim_; }
  int num_agents() const noexcept { return num_agents_; }
  const Eigen::VectorXd& coords() const noexcept { return coords_; }

  Eigen::VectorXd agent(int i) const;
  /// N x n matrix X = (x^1, ..., x^n); row i is agent i.
  Eigen::MatrixXd agent_matrix() const;
  /// Agent-major flattening (x_1, ..., x_N).
  Eigen::VectorXd agent_major() const;

  Configuration subconfiguration(std::span<const int> agents) const;

 private:
  int dim_ = 0;
  int num_agents_ = 0;
  Eigen::VectorXd coords_;
};

/// Agent-major <-> coordinate-major index maps for a given (n, N).
inline int coordinate_major_index(int agent, int coord, int num_agents) { return coord * num_agents + agent; }
inline int agent_major_index(int agent, int coord, int dim) { return agent * dim + coord; }

/// Rank of the difference vectors x_i - x_first over `subset` (all agents by default).
/// The threshold is floored at the largest coordinate magnitude of those agents,
/// the scale at which the differences carry round-off.
int configuration_rank(const Configuration& p, std::optional<std::span<const int>> subset = std::nullopt,
                       double tau = kDefaultRankTolerance);

/// Rank of the N x (n+1) matrix (1, x^1, ..., x^n).
int extended_matrix_rank(const Configuration& p, double tau = kDefaultRankTolerance);

struct QMembership {
  bool in_q = false;
  std::vector<std::pair<int, int>> component_ranks;  // (maximal component, rank)
};

/// p lies in Q iff every maximal component's sub-configuration has rank n.
QMembership in_q(const Configuration& p, const ScdReport& scd, double tau = kDefaultRankTolerance);

/// d_k = -k^2 + k(N + n - 1) + n, defined for 0 <= k <= n <= N.
int stratum_dimension(int k, int num_agents, int dim);

/// nN - d_k >= N - n for all k < n; requires N > n.
bool codimension_bound_holds(int num_agents, int dim);

/// Local straightening chart of the rank-k stratum around a center configuration.
///
/// Agents in `index_choice` realise the rank. The chart sends p' to
/// (v_1, ..., v_N) (agent-major) with v_i = x'_i - x_i on chosen agents and
/// v_i = L(p') (x'_i - x'_a) - L(p) (x_i - x_a) on the others, where a is the
/// first chosen agent and L = (A, B)^T. Rank-k neighbours land in the slice
/// where the last n-k entries of every non-chosen v_i vanish.
class StratumChart {
 public:
  static StratumChart build(const Configuration& center, int k, double tau = kDefaultRankTolerance);

  const Configuration& center() const noexcept { return center_; }
  int rank() const noexcept { return k_; }
  const std::vector<int>& index_choice() const noexcept { return index_choice_; }
  const Eigen::MatrixXd& a_part() const noexcept { return a_part_; }
  const Eigen::MatrixXd& b_part() const noexcept { return b_part_; }
  const Eigen::MatrixXd& l_map() const noexcept { return l_map_; }

  Eigen::VectorXd forward(const Configuration& p) const;
  Configuration inverse(const Eigen::VectorXd& v) const;

  /// Agent-major positions that vanish exactly on the stratum; (n-k)(N-k-1) of them.
  std::vector<int> forced_zero_indices() const;

 private:
  // (A(p'), B(p')) for the chosen agents of p'.
  std::pair<Eigen::MatrixXd, Eigen::MatrixXd> frame_at(const Configuration& p) const;

  Configuration center_;
  int k_ = 0;
  std::vector<int> index_choice_;
  std::vector<int> others_;
  Eigen::MatrixXd a_part_;
  Eigen::MatrixXd b_part_;
  Eigen::MatrixXd b_seed_;
  Eigen::MatrixXd l_map_;
};

/// Throws RankMismatch when configuration_rank(p) != k.
StratumChart local_chart(const Configuration& p, int k, double tau = kDefaultRankTolerance);

/// Greedy scan in index order keeping agents that raise the affine rank; n+1 indices.
std::vector<int> find_nondegenerate_simplex(const Configuration& p, double tau = kDefaultRankTolerance);

/// Given n+1 simplex vertices (columns) and a point x, returns the n kept vertex
/// indices (ascending) whose hull with x is non-degenerate; drops the smallest possible index.
std::vector<int> extend_simplex_with_point(const Eigen::MatrixXd& simplex, const Eigen::VectorXd& x,
                                           double tau = kDefaultRankTolerance);

struct AffineSubspace {
  Eigen::VectorXd base_point;
  Eigen::MatrixXd basis;  // orthonormal columns

  int ambient_dim() const { return static_cast<int>(base_point.size()); }
  int dim() const { return static_cast<int>(basis.cols()); }
  double distance_to(const Eigen::VectorXd& x) const;
};

/// Lowest-dimensional affine subspace containing the points (columns).
AffineSubspace affine_hull(const Eigen::MatrixXd& points, double tau = kDefaultRankTolerance);

/// Common intersection, or nullopt when empty.
std::optional<AffineSubspace> intersect_affine(const std::vector<AffineSubspace>& subspaces,
                                               double tau = kDefaultRankTolerance);

/// Infinity when dimensions differ, else the larger of the base-point offset and
/// the direction mismatch.
double subspace_distance(const AffineSubspace& a, const AffineSubspace& b);

/// Sign of det(x_2 - x_1, ..., x_{n+1} - x_1) for an (n+1)-agent configuration.
int component_sign(const Configuration& p_sub, double tau = kDefaultRankTolerance);

struct SampleKind {
  enum class Type { Uniform, RankK } type = Type::Uniform;
  int k = 0;

  static SampleKind uniform() { return {Type::Uniform, 0}; }
  static SampleKind rank(int k) { return {Type::RankK, k}; }
};

/// Deterministic in `seed`; coordinates drawn from [-1, 1].
Configuration sample_configuration(int dim, int num_agents, SampleKind kind, std::uint64_t seed,
                                   double tau = kDefaultRankTolerance);

}  // namespace formctl
