#include "formctl/configspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "formctl/errors.hpp"

namespace formctl {

int numeric_rank(const Eigen::MatrixXd& m, double tau, double floor) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sigma = svd.singularValues();
  const double smax = sigma.size() ? sigma.maxCoeff() : 0.0;
  if (smax == 0.0) return 0;
  const double threshold = tau * std::max(smax, floor);
  int rank = 0;
  for (Eigen::Index k = 0; k < sigma.size(); ++k)
    if (sigma[k] > threshold) ++rank;
  return rank;
}

Eigen::MatrixXd orthonormal_column_basis(const Eigen::MatrixXd& m, double tau) {
  if (m.size() == 0) return Eigen::MatrixXd(m.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
  const auto& sigma = svd.singularValues();
  const double smax = sigma.maxCoeff();
  int rank = 0;
  if (smax > 0.0)
    for (Eigen::Index k = 0; k < sigma.size(); ++k)
      if (sigma[k] > tau * smax) ++rank;
  return svd.matrixU().leftCols(rank);
}

Configuration::Configuration(int dim, int num_agents, Eigen::VectorXd coordinate_major)
    : dim_(dim), num_agents_(num_agents), coords_(std::move(coordinate_major)) {
  if (dim <= 0 || num_agents <= 0) {
    throw Error(ErrorCode::InvalidArgument, "configuration needs positive dimension and agent count");
  }
  if (coords_.size() != static_cast<Eigen::Index>(dim) * num_agents) {
    throw Error(ErrorCode::SizeMismatch, "coordinate vector length is not n*N");
  }
  if (!coords_.allFinite()) throw Error(ErrorCode::InvalidArgument, "configuration has non-finite coordinates");
}

Configuration Configuration::from_agents(const Eigen::MatrixXd& agents) {
  const int num_agents = static_cast<int>(agents.rows());
  const int dim = static_cast<int>(agents.cols());
  Eigen::VectorXd coords(static_cast<Eigen::Index>(dim) * num_agents);
  for (int c = 0; c < dim; ++c) coords.segment(static_cast<Eigen::Index>(c) * num_agents, num_agents) = agents.col(c);
  return Configuration(dim, num_agents, std::move(coords));
}

Configuration Configuration::from_agents(const std::vector<std::vector<double>>& agents) {
  if (agents.empty()) throw Error(ErrorCode::EmptyInput, "no agents");
  const std::size_t dim = agents.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(agents.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (agents[i].size() != dim) throw Error(ErrorCode::SizeMismatch, "agents have differing dimensions");
    for (std::size_t c = 0; c < dim; ++c) m(i, c) = agents[i][c];
  }
  return from_agents(m);
}

Eigen::VectorXd Configuration::agent(int i) const {
  Eigen::VectorXd x(dim_);
  for (int c = 0; c < dim_; ++c) x[c] = coords_[coordinate_major_index(i, c, num_agents_)];
  return x;
}

Eigen::MatrixXd Configuration::agent_matrix() const {
  return Eigen::Map<const Eigen::MatrixXd>(coords_.data(), num_agents_, dim_);
}

Eigen::VectorXd Configuration::agent_major() const {
  Eigen::VectorXd out(coords_.size());
  for (int i = 0; i < num_agents_; ++i)
    for (int c = 0; c < dim_; ++c) out[agent_major_index(i, c, dim_)] = coords_[coordinate_major_index(i, c, num_agents_)];
  return out;
}

Configuration Configuration::subconfiguration(std::span<const int> agents) const {
  Eigen::MatrixXd sub(static_cast<Eigen::Index>(agents.size()), dim_);
  for (std::size_t r = 0; r < agents.size(); ++r) {
    if (agents[r] < 0 || agents[r] >= num_agents_) throw Error(ErrorCode::IndexOutOfRange, "agent index out of range");
    sub.row(static_cast<Eigen::Index>(r)) = agent(agents[r]).transpose();
  }
  return from_agents(sub);
}

namespace {

Eigen::MatrixXd difference_matrix(const Configuration& p, std::span<const int> agents) {
  Eigen::MatrixXd d(p.dim(), agents.size() > 0 ? static_cast<Eigen::Index>(agents.size()) - 1 : 0);
  if (agents.empty()) return d;
  const Eigen::VectorXd origin = p.agent(agents[0]);
  for (std::size_t k = 1; k < agents.size(); ++k) d.col(static_cast<Eigen::Index>(k) - 1) = p.agent(agents[k]) - origin;
  return d;
}

std::vector<int> all_agents(int n) {
  std::vector<int> out(n);
  std::iota(out.begin(), out.end(), 0);
  return out;
}

int rank_of_points(const Eigen::MatrixXd& columns, double tau) {
  if (columns.cols() <= 1) return 0;
  Eigen::MatrixXd d = columns.rightCols(columns.cols() - 1).colwise() - columns.col(0);
  return numeric_rank(d, tau, columns.cwiseAbs().maxCoeff());
}

}  // namespace

int configuration_rank(const Configuration& p, std::optional<std::span<const int>> subset, double tau) {
  if (subset) {
    if (subset->empty()) throw Error(ErrorCode::EmptySubset, "empty agent subset");
    double scale = 0.0;
    for (int a : *subset) scale = std::max(scale, p.agent(a).cwiseAbs().maxCoeff());
    return numeric_rank(difference_matrix(p, *subset), tau, scale);
  }
  const auto agents = all_agents(p.num_agents());
  return numeric_rank(difference_matrix(p, agents), tau, p.coords().cwiseAbs().maxCoeff());
}

int extended_matrix_rank(const Configuration& p, double tau) {
  Eigen::MatrixXd xe(p.num_agents(), p.dim() + 1);
  xe.col(0).setOnes();
  xe.rightCols(p.dim()) = p.agent_matrix();
  return numeric_rank(xe, tau);
}

QMembership in_q(const Configuration& p, const ScdReport& scd, double tau) {
  if (static_cast<int>(scd.component_of.size()) != p.num_agents()) {
    throw Error(ErrorCode::SizeMismatch, "decomposition and configuration disagree on agent count");
  }
  QMembership out;
  out.in_q = true;
  for (int c : scd.maximal_set) {
    const int rank = configuration_rank(p, std::span<const int>(scd.components[c]), tau);
    out.component_ranks.emplace_back(c, rank);
    if (rank != p.dim()) out.in_q = false;
  }
  return out;
}

int stratum_dimension(int k, int num_agents, int dim) {
  if (k < 0 || k > dim || dim > num_agents) {
    throw Error(ErrorCode::IndexOutOfRange, "stratum index requires 0 <= k <= n <= N");
  }
  return -k * k + k * (num_agents + dim - 1) + dim;
}

bool codimension_bound_holds(int num_agents, int dim) {
  if (num_agents <= dim) throw Error(ErrorCode::RequiresNGreaterThann, "needs N > n");
  const int total = dim * num_agents;
  for (int k = 0; k < dim; ++k)
    if (total - stratum_dimension(k, num_agents, dim) < num_agents - dim) return false;
  return true;
}

StratumChart StratumChart::build(const Configuration& center, int k, double tau) {
  const int rank = configuration_rank(center, std::nullopt, tau);
  if (rank != k) {
    throw Error(ErrorCode::RankMismatch,
                "configuration has rank " + std::to_string(rank) + ", chart requested for " + std::to_string(k));
  }
  StratumChart chart;
  chart.center_ = center;
  chart.k_ = k;
  const int n = center.dim();

  chart.index_choice_.push_back(0);
  int current = 0;
  for (int i = 1; i < center.num_agents() && current < k; ++i) {
    auto trial = chart.index_choice_;
    trial.push_back(i);
    int r = configuration_rank(center, std::span<const int>(trial), tau);
    if (r > current) {
      chart.index_choice_ = std::move(trial);
      current = r;
    }
  }
  for (int i = 0; i < center.num_agents(); ++i)
    if (std::find(chart.index_choice_.begin(), chart.index_choice_.end(), i) == chart.index_choice_.end())
      chart.others_.push_back(i);

  // Fixed complement at the center; Gram-Schmidt against A(p') gives B(p').
  Eigen::MatrixXd a = difference_matrix(center, chart.index_choice_);
  if (k == 0) {
    chart.b_seed_ = Eigen::MatrixXd::Identity(n, n);
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU);
    chart.b_seed_ = svd.matrixU().rightCols(n - k);
  }
  auto [a_part, b_part] = chart.frame_at(center);
  chart.a_part_ = std::move(a_part);
  chart.b_part_ = std::move(b_part);
  chart.l_map_.resize(n, n);
  chart.l_map_ << chart.a_part_.transpose(), chart.b_part_.transpose();
  return chart;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> StratumChart::frame_at(const Configuration& p) const {
  Eigen::MatrixXd a = difference_matrix(p, index_choice_);
  const int n = p.dim();
  std::vector<Eigen::VectorXd> accepted;
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    Eigen::VectorXd v = a.col(c);
    for (const auto& q : accepted) v -= q * q.dot(v);
    accepted.push_back(v.normalized());
  }
  Eigen::MatrixXd b(n, n - k_);
  for (int c = 0; c < n - k_; ++c) {
    Eigen::VectorXd v = b_seed_.col(c);
    for (const auto& q : accepted) v -= q * q.dot(v);
    v.normalize();
    accepted.push_back(v);
    b.col(c) = v;
  }
  return {std::move(a), std::move(b)};
}

Eigen::VectorXd StratumChart::forward(const Configuration& p) const {
  if (p.dim() != center_.dim() || p.num_agents() != center_.num_agents()) {
    throw Error(ErrorCode::SizeMismatch, "configuration shape differs from chart center");
  }
  const int n = p.dim();
  auto [a, b] = frame_at(p);
  Eigen::MatrixXd l(n, n);
  l << a.transpose(), b.transpose();

  Eigen::VectorXd v(p.coords().size());
  for (int i : index_choice_) v.segment(static_cast<Eigen::Index>(i) * n, n) = p.agent(i) - center_.agent(i);
  const int anchor = index_choice_.front();
  const Eigen::VectorXd x_anchor = p.agent(anchor);
  const Eigen::VectorXd c_anchor = center_.agent(anchor);
  for (int i : others_) {
    v.segment(static_cast<Eigen::Index>(i) * n, n) =
        l * (p.agent(i) - x_anchor) - l_map_ * (center_.agent(i) - c_anchor);
  }
  return v;
}

Configuration StratumChart::inverse(const Eigen::VectorXd& v) const {
  const int n = center_.dim();
  const int num_agents = center_.num_agents();
  if (v.size() != static_cast<Eigen::Index>(n) * num_agents) {
    throw Error(ErrorCode::SizeMismatch, "chart vector length is not n*N");
  }
  Eigen::MatrixXd agents = center_.agent_matrix();
  for (int i : index_choice_) agents.row(i) += v.segment(static_cast<Eigen::Index>(i) * n, n).transpose();
  Configuration partial = Configuration::from_agents(agents);
  auto [a, b] = frame_at(partial);
  Eigen::MatrixXd l(n, n);
  l << a.transpose(), b.transpose();
  const auto lu = l.partialPivLu();

  const int anchor = index_choice_.front();
  const Eigen::VectorXd x_anchor = partial.agent(anchor);
  const Eigen::VectorXd c_anchor = center_.agent(anchor);
  for (int i : others_) {
    Eigen::VectorXd rhs = v.segment(static_cast<Eigen::Index>(i) * n, n) + l_map_ * (center_.agent(i) - c_anchor);
    agents.row(i) = (x_anchor + lu.solve(rhs)).transpose();
  }
  return Configuration::from_agents(agents);
}

std::vector<int> StratumChart::forced_zero_indices() const {
  const int n = center_.dim();
  std::vector<int> out;
  for (int i : others_)
    for (int c = k_; c < n; ++c) out.push_back(agent_major_index(i, c, n));
  std::sort(out.begin(), out.end());
  return out;
}

StratumChart local_chart(const Configuration& p, int k, double tau) { return StratumChart::build(p, k, tau); }

std::vector<int> find_nondegenerate_simplex(const Configuration& p, double tau) {
  const int n = p.dim();
  if (configuration_rank(p, std::nullopt, tau) < n) {
    throw Error(ErrorCode::Degenerate, "configuration is degenerate");
  }
  std::vector<int> chosen{0};
  int current = 0;
  for (int i = 1; i < p.num_agents() && current < n; ++i) {
    auto trial = chosen;
    trial.push_back(i);
    int r = configuration_rank(p, std::span<const int>(trial), tau);
    if (r > current) {
      chosen = std::move(trial);
      current = r;
    }
  }
  return chosen;
}

std::vector<int> extend_simplex_with_point(const Eigen::MatrixXd& simplex, const Eigen::VectorXd& x, double tau) {
  const int n = static_cast<int>(simplex.rows());
  if (simplex.cols() != n + 1 || x.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "simplex must be n x (n+1) and the point must lie in R^n");
  }
  if (rank_of_points(simplex, tau) != n) throw Error(ErrorCode::SimplexDegenerate, "simplex is degenerate");
  for (int drop = 0; drop <= n; ++drop) {
    Eigen::MatrixXd pts(n, n + 1);
    std::vector<int> kept;
    int col = 0;
    for (int k = 0; k <= n; ++k) {
      if (k == drop) continue;
      kept.push_back(k);
      pts.col(col++) = simplex.col(k);
    }
    pts.col(n) = x;
    if (rank_of_points(pts, tau) == n) return kept;
  }
  throw Error(ErrorCode::SimplexDegenerate, "no leave-one-out choice is non-degenerate");
}

double AffineSubspace::distance_to(const Eigen::VectorXd& x) const {
  Eigen::VectorXd d = x - base_point;
  if (basis.cols() > 0) d -= basis * (basis.transpose() * d);
  return d.norm();
}

AffineSubspace affine_hull(const Eigen::MatrixXd& points, double tau) {
  if (points.cols() == 0) throw Error(ErrorCode::EmptyInput, "no points");
  AffineSubspace out;
  out.base_point = points.col(0);
  if (points.cols() == 1) {
    out.basis = Eigen::MatrixXd(points.rows(), 0);
    return out;
  }
  Eigen::MatrixXd d = points.rightCols(points.cols() - 1).colwise() - points.col(0);
  out.basis = orthonormal_column_basis(d, tau);
  return out;
}

std::optional<AffineSubspace> intersect_affine(const std::vector<AffineSubspace>& subspaces, double tau) {
  if (subspaces.empty()) throw Error(ErrorCode::EmptyInput, "no subspaces");
  const int n = subspaces.front().ambient_dim();
  double scale = 0.0;
  for (const auto& s : subspaces) {
    if (s.ambient_dim() != n || s.basis.rows() != n) {
      throw Error(ErrorCode::DimensionMismatch, "subspaces live in different ambient dimensions");
    }
    scale = std::max(scale, s.base_point.cwiseAbs().maxCoeff());
  }

  // x lies in every subspace iff (I - U U^T)(x - b) = 0 for each of them.
  const Eigen::Index m = static_cast<Eigen::Index>(subspaces.size());
  Eigen::MatrixXd stacked(m * n, n);
  Eigen::VectorXd rhs(m * n);
  for (Eigen::Index s = 0; s < m; ++s) {
    const auto& sub = subspaces[s];
    Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(n, n);
    if (sub.dim() > 0) proj -= sub.basis * sub.basis.transpose();
    stacked.block(s * n, 0, n, n) = proj;
    rhs.segment(s * n, n) = proj * sub.base_point;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeFullV | Eigen::ComputeThinU);
  const auto& sigma = svd.singularValues();
  const double smax = sigma.size() ? sigma.maxCoeff() : 0.0;
  int rank = 0;
  if (smax > 0.0)
    for (Eigen::Index k = 0; k < sigma.size(); ++k)
      if (sigma[k] > tau * smax) ++rank;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  if (rank > 0) {
    Eigen::VectorXd utb = svd.matrixU().leftCols(rank).transpose() * rhs;
    for (int k = 0; k < rank; ++k) utb[k] /= sigma[k];
    x = svd.matrixV().leftCols(rank) * utb;
  }
  const double accept = 1e-8 * (1.0 + scale);
  for (const auto& sub : subspaces)
    if (sub.distance_to(x) > accept) return std::nullopt;

  AffineSubspace out;
  out.base_point = x;
  out.basis = svd.matrixV().rightCols(n - rank);
  return out;
}

double subspace_distance(const AffineSubspace& a, const AffineSubspace& b) {
  if (a.dim() != b.dim() || a.ambient_dim() != b.ambient_dim()) return std::numeric_limits<double>::infinity();
  double d = std::max(a.distance_to(b.base_point), b.distance_to(a.base_point));
  if (a.dim() > 0) {
    Eigen::MatrixXd residual = b.basis - a.basis * (a.basis.transpose() * b.basis);
    d = std::max(d, residual.norm());
  }
  return d;
}

int component_sign(const Configuration& p_sub, double tau) {
  const int n = p_sub.dim();
  if (p_sub.num_agents() != n + 1) throw Error(ErrorCode::SizeMismatch, "component sign needs exactly n+1 agents");
  if (configuration_rank(p_sub, std::nullopt, tau) < n) throw Error(ErrorCode::Degenerate, "sub-configuration is degenerate");
  const auto agents = all_agents(n + 1);
  const double det = difference_matrix(p_sub, agents).determinant();
  return det > 0 ? 1 : -1;
}

namespace {

double unit_interval(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double symmetric(std::mt19937_64& rng) { return 2.0 * unit_interval(rng) - 1.0; }

}  // namespace

Configuration sample_configuration(int dim, int num_agents, SampleKind kind, std::uint64_t seed, double tau) {
  if (dim <= 0 || num_agents <= 0) throw Error(ErrorCode::InvalidArgument, "dimension and agent count must be positive");
  std::mt19937_64 rng(seed);
  if (kind.type == SampleKind::Type::Uniform) {
    Eigen::MatrixXd agents(num_agents, dim);
    for (int i = 0; i < num_agents; ++i)
      for (int c = 0; c < dim; ++c) agents(i, c) = symmetric(rng);
    return Configuration::from_agents(agents);
  }

  const int k = kind.k;
  if (k < 0 || k > dim || k + 1 > num_agents) {
    throw Error(ErrorCode::InvalidStratum, "rank " + std::to_string(k) + " unreachable with n=" +
                                               std::to_string(dim) + ", N=" + std::to_string(num_agents));
  }
  for (int attempt = 0; attempt < 64; ++attempt) {
    Eigen::MatrixXd anchors(k + 1, dim);
    for (int a = 0; a <= k; ++a)
      for (int c = 0; c < dim; ++c) anchors(a, c) = symmetric(rng);
    Eigen::MatrixXd agents(num_agents, dim);
    agents.topRows(k + 1) = anchors;
    for (int i = k + 1; i < num_agents; ++i) {
      Eigen::RowVectorXd x = anchors.row(0);
      for (int a = 1; a <= k; ++a) x += symmetric(rng) * (anchors.row(a) - anchors.row(0));
      agents.row(i) = x;
    }
    Configuration p = Configuration::from_agents(agents);
    if (configuration_rank(p, std::nullopt, tau) == k) return p;
  }
  throw Error(ErrorCode::InvalidStratum, "failed to sample a configuration of rank " + std::to_string(k));
}

}  // namespace formctl
