#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "formctl/configspace.hpp"
#include "formctl/digraph.hpp"
#include "formctl/liealg.hpp"

namespace formctl {

/// D(A) = diag(A, ..., A), n copies, acting on coordinate-major configurations.
Eigen::MatrixXd lift_block_diagonal(const ZeroRowSumMatrix& a, int dim);

/// D(A) p without forming the nN x nN matrix. `a` may be any N x N matrix.
Eigen::VectorXd apply_lift(const Eigen::MatrixXd& a, const Eigen::VectorXd& coordinate_major, int dim);

/// The control field g_ij(p) = D(A_ij) p: (x_j - x_i) in agent i's slots.
Eigen::VectorXd lifted_field(const EdgeGenerator& generator, const Configuration& p);

struct LarcReport {
  int dim = 0;
  int required = 0;
  bool passes = false;
  std::vector<int> per_agent_ranks;
  int closure_edges = 0;
  std::optional<int> slow_path_dim;     // stacked-field rank, when requested
  std::optional<int> bracket_path_dim;  // numerically bracketed lifted fields, when requested
};

struct LarcOptions {
  double tau = kDefaultRankTolerance;
  bool debug_slow_path = false;
};

/// dim L_p through the closure edges: sum over agents of rank{x_j - x_i : i -> j in closure}.
/// With `debug_slow_path` the stacked-field rank and an independent numerical
/// bracket closure of the lifted fields are computed too; a disagreement throws.
LarcReport lie_algebra_at(const Configuration& p, const Digraph& g, const LarcOptions& options = {});

bool larc_passes(const Configuration& p, const Digraph& g, double tau = kDefaultRankTolerance);

/// Numerical closure of {D(A_ij)} under the matrix commutator, evaluated at p.
/// Independent of the transitive-closure characterisation; intended for small cases.
int bracketed_field_dimension(const Configuration& p, const Digraph& g, double tau = kDefaultRankTolerance);

struct WitnessLabel {
  enum class Block { Simplex, Attachment } block = Block::Simplex;
  int owner = 0;  // maximal component (Simplex) or attached agent (Attachment)
  Edge edge;      // generating edge i -> j
};

struct WitnessBasis {
  std::vector<Eigen::VectorXd> vectors;  // coordinate-major, length nN
  std::vector<WitnessLabel> labels;
  std::vector<std::vector<int>> simplices;  // per maximal component, in maximal-set order

  Eigen::MatrixXd as_matrix() const;
};

std::string to_string(const WitnessLabel& label);

/// nN independent tangent vectors: a simplex block for each maximal component and
/// n attachment vectors for every other agent. Throws StructuralFailure when the
/// graph is not generically controllable for n, NotInQ when p is outside Q.
WitnessBasis construct_witness_basis(const Configuration& p, const Digraph& g, double tau = kDefaultRankTolerance);

}  // namespace formctl
