#include "formctl/larc.hpp"

#include <algorithm>
#include <string>

#include "formctl/errors.hpp"

namespace formctl {

namespace {

Eigen::MatrixXd to_eigen(const ZeroRowSumMatrix& a) {
  Eigen::MatrixXd m(a.size(), a.size());
  for (int r = 0; r < a.size(); ++r)
    for (int c = 0; c < a.size(); ++c) m(r, c) = static_cast<double>(a(r, c));
  return m;
}

}  // namespace

Eigen::MatrixXd lift_block_diagonal(const ZeroRowSumMatrix& a, int dim) {
  const int n = a.size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n) * dim, static_cast<Eigen::Index>(n) * dim);
  const Eigen::MatrixXd block = to_eigen(a);
  for (int c = 0; c < dim; ++c) out.block(static_cast<Eigen::Index>(c) * n, static_cast<Eigen::Index>(c) * n, n, n) = block;
  return out;
}

Eigen::VectorXd apply_lift(const Eigen::MatrixXd& a, const Eigen::VectorXd& coordinate_major, int dim) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || coordinate_major.size() != n * dim) {
    throw Error(ErrorCode::SizeMismatch, "lift operand sizes disagree");
  }
  Eigen::VectorXd out(coordinate_major.size());
  for (int c = 0; c < dim; ++c) out.segment(c * n, n) = a * coordinate_major.segment(c * n, n);
  return out;
}

Eigen::VectorXd lifted_field(const EdgeGenerator& generator, const Configuration& p) {
  if (generator.size != p.num_agents()) throw Error(ErrorCode::SizeMismatch, "generator size differs from agent count");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(p.coords().size());
  const int num_agents = p.num_agents();
  for (int c = 0; c < p.dim(); ++c) {
    const double xi = p.coords()[coordinate_major_index(generator.i, c, num_agents)];
    const double xj = p.coords()[coordinate_major_index(generator.j, c, num_agents)];
    out[coordinate_major_index(generator.i, c, num_agents)] = xj - xi;
  }
  return out;
}

int bracketed_field_dimension(const Configuration& p, const Digraph& g, double tau) {
  const int dim = p.dim();
  const Eigen::Index side = p.coords().size();
  // Linear fields p -> M p; their bracket is the field of M_g M_f - M_f M_g.
  std::vector<Eigen::MatrixXd> fields;
  std::vector<Eigen::VectorXd> orthonormal;  // vectorised, for independence tests
  auto try_add = [&](const Eigen::MatrixXd& m) {
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
    const double norm = v.norm();
    if (norm == 0.0) return;
    for (const auto& q : orthonormal) v -= q * q.dot(v);
    for (const auto& q : orthonormal) v -= q * q.dot(v);
    if (v.norm() <= 1e-9 * norm) return;
    orthonormal.push_back(v.normalized());
    fields.push_back(m);
  };
  for (const auto& gen : generators_of(g)) try_add(lift_block_diagonal(gen.dense(), dim));
  for (std::size_t j = 0; j < fields.size(); ++j)
    for (std::size_t i = 0; i < j; ++i) try_add(fields[j] * fields[i] - fields[i] * fields[j]);

  Eigen::MatrixXd evaluated(side, static_cast<Eigen::Index>(fields.size()));
  for (std::size_t k = 0; k < fields.size(); ++k) evaluated.col(static_cast<Eigen::Index>(k)) = fields[k] * p.coords();
  return numeric_rank(evaluated, tau, p.coords().cwiseAbs().maxCoeff());
}

LarcReport lie_algebra_at(const Configuration& p, const Digraph& g, const LarcOptions& options) {
  if (p.num_agents() != g.num_vertices()) {
    throw Error(ErrorCode::SizeMismatch, "configuration has " + std::to_string(p.num_agents()) +
                                             " agents, graph has " + std::to_string(g.num_vertices()) + " vertices");
  }
  const Digraph closure = transitive_closure(g);
  const int n = p.dim();
  const double scale = p.coords().cwiseAbs().maxCoeff();
  LarcReport report;
  report.required = n * p.num_agents();
  report.closure_edges = static_cast<int>(closure.num_edges());
  report.per_agent_ranks.assign(p.num_agents(), 0);
  for (int i = 0; i < p.num_agents(); ++i) {
    const auto& targets = closure.out_neighbors(i);
    if (targets.empty()) continue;
    Eigen::MatrixXd diffs(n, static_cast<Eigen::Index>(targets.size()));
    const Eigen::VectorXd xi = p.agent(i);
    for (std::size_t k = 0; k < targets.size(); ++k) diffs.col(static_cast<Eigen::Index>(k)) = p.agent(targets[k]) - xi;
    report.per_agent_ranks[i] = numeric_rank(diffs, options.tau, scale);
  }
  for (int r : report.per_agent_ranks) report.dim += r;
  report.passes = report.dim == report.required;

  if (options.debug_slow_path) {
    Eigen::MatrixXd stacked(p.coords().size(), static_cast<Eigen::Index>(closure.num_edges()));
    Eigen::Index col = 0;
    for (const auto& gen : generators_of(closure)) stacked.col(col++) = lifted_field(gen, p);
    report.slow_path_dim = numeric_rank(stacked, options.tau, scale);
    report.bracket_path_dim = bracketed_field_dimension(p, g, options.tau);
    if (*report.slow_path_dim != report.dim || *report.bracket_path_dim != report.dim) {
      throw Error(ErrorCode::RankMismatch,
                  "rank routes disagree: per-agent " + std::to_string(report.dim) + ", stacked " +
                      std::to_string(*report.slow_path_dim) + ", bracketed " + std::to_string(*report.bracket_path_dim));
    }
  }
  return report;
}

bool larc_passes(const Configuration& p, const Digraph& g, double tau) {
  return lie_algebra_at(p, g, LarcOptions{tau, false}).passes;
}

Eigen::MatrixXd WitnessBasis::as_matrix() const {
  if (vectors.empty()) return {};
  Eigen::MatrixXd m(vectors.front().size(), static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t k = 0; k < vectors.size(); ++k) m.col(static_cast<Eigen::Index>(k)) = vectors[k];
  return m;
}

std::string to_string(const WitnessLabel& label) {
  const std::string edge = std::to_string(label.edge.from + 1) + "->" + std::to_string(label.edge.to + 1);
  if (label.block == WitnessLabel::Block::Simplex) return "simplex:c" + std::to_string(label.owner + 1) + ":" + edge;
  return "attach:x" + std::to_string(label.owner + 1) + ":" + edge;
}

WitnessBasis construct_witness_basis(const Configuration& p, const Digraph& g, double tau) {
  if (p.num_agents() != g.num_vertices()) throw Error(ErrorCode::SizeMismatch, "agent count differs from vertex count");
  const int n = p.dim();
  const StructuralVerdict verdict = structural_verdict(g, n);
  if (verdict.kind != VerdictKind::GenericallyControllable) {
    std::string offending;
    for (int c : verdict.offending_components) offending += " " + std::to_string(c + 1);
    throw Error(ErrorCode::StructuralFailure,
                std::string("verdict ") + to_string(verdict.kind) + ", offending components:" + offending);
  }
  const ScdReport scd = coarse_scd(g);
  if (!in_q(p, scd, tau).in_q) throw Error(ErrorCode::NotInQ, "some maximal component is degenerate");

  const Digraph closure = transitive_closure(g);
  const Digraph skeleton_closure = transitive_closure(scd.skeleton);
  WitnessBasis basis;
  std::vector<char> in_simplex(p.num_agents(), 0);

  auto emit = [&](int from, int to, WitnessLabel::Block block, int owner) {
    if (!closure.has_edge(from, to)) {
      throw Error(ErrorCode::StructuralFailure, "missing closure edge " + std::to_string(from + 1) + "->" +
                                                    std::to_string(to + 1));
    }
    basis.vectors.push_back(lifted_field(EdgeGenerator::make(from, to, p.num_agents()), p));
    basis.labels.push_back({block, owner, Edge{from, to}});
  };

  for (int c : scd.maximal_set) {
    const auto& members = scd.components[c];
    const auto local = find_nondegenerate_simplex(p.subconfiguration(members), tau);
    std::vector<int> simplex;
    for (int k : local) simplex.push_back(members[k]);
    for (int j : simplex) in_simplex[j] = 1;
    for (int j : simplex)
      for (int k : simplex)
        if (j != k) emit(j, k, WitnessLabel::Block::Simplex, c);
    basis.simplices.push_back(std::move(simplex));
  }

  for (int a = 0; a < p.num_agents(); ++a) {
    if (in_simplex[a]) continue;
    const int own = scd.component_of[a];
    std::size_t target = scd.maximal_set.size();
    for (std::size_t m = 0; m < scd.maximal_set.size(); ++m) {
      const int c = scd.maximal_set[m];
      if (c == own || skeleton_closure.has_edge(own, c)) {
        target = m;
        break;
      }
    }
    if (target == scd.maximal_set.size()) {
      throw Error(ErrorCode::StructuralFailure, "agent " + std::to_string(a + 1) + " reaches no maximal component");
    }
    const auto& simplex = basis.simplices[target];
    Eigen::MatrixXd corners(n, n + 1);
    for (int k = 0; k <= n; ++k) corners.col(k) = p.agent(simplex[k]);
    for (int k : extend_simplex_with_point(corners, p.agent(a), tau)) emit(a, simplex[k], WitnessLabel::Block::Attachment, a);
  }
  return basis;
}

}  // namespace formctl
