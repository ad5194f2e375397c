#include <doctest.h>

#include <random>

#include "formctl/configspace.hpp"
#include "formctl/errors.hpp"
#include "formctl/larc.hpp"
#include "oracles.hpp"

using namespace formctl;

namespace {

Eigen::MatrixXd dense(const ZeroRowSumMatrix& m) {
  Eigen::MatrixXd out(m.size(), m.size());
  for (int r = 0; r < m.size(); ++r)
    for (int c = 0; c < m.size(); ++c) out(r, c) = static_cast<double>(m(r, c));
  return out;
}

ZeroRowSumMatrix random_zero_row_sum(int n, std::mt19937_64& rng) {
  std::vector<std::int64_t> e(n * n, 0);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      if (r != c) {
        e[r * n + c] = static_cast<std::int64_t>(rng() % 7) - 3;
        e[r * n + r] -= e[r * n + c];
      }
  return ZeroRowSumMatrix::from_entries(n, e);
}

// Independent evaluation of dim L_p: brackets of lifted fields are D of the
// matrix brackets, so stack every closure generator field and take the SVD rank.
int stacked_rank(const Configuration& p, const Digraph& g) {
  const auto r = oracle::reach(g);
  std::vector<Eigen::VectorXd> cols;
  const int n = p.num_agents();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && r[i][j]) {
        const Eigen::MatrixXd a = oracle::generator(i, j, n);
        Eigen::VectorXd v(p.coords().size());
        for (int c = 0; c < p.dim(); ++c) v.segment(c * n, n) = a * p.coords().segment(c * n, n);
        cols.push_back(v);
      }
  if (cols.empty()) return 0;
  Eigen::MatrixXd m(p.coords().size(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) m.col(static_cast<Eigen::Index>(k)) = cols[k];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k) rank += s[k] > 1e-9 * s[0];
  return rank;
}

}  // namespace

TEST_CASE("block-diagonal lift") {
  const auto p = Configuration::from_agents(std::vector<std::vector<double>>{{1, 2}, {4, 8}, {0, 0}});
  const Eigen::VectorXd zero = apply_lift(Eigen::MatrixXd::Zero(3, 3), p.coords(), 2);
  CHECK(zero.isZero(0.0));
  const Eigen::VectorXd f = lift_block_diagonal(edge_generator(0, 1, 3), 2) * p.coords();
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(6);
  expected[coordinate_major_index(0, 0, 3)] = 3;
  expected[coordinate_major_index(0, 1, 3)] = 6;
  CHECK(f == expected);
  CHECK(lifted_field(EdgeGenerator::make(0, 1, 3), p) == expected);
}

TEST_CASE("lift is a Lie algebra homomorphism") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4), dim = 1 + static_cast<int>(rng() % 3);
    const auto a = random_zero_row_sum(n, rng), b = random_zero_row_sum(n, rng);
    const Eigen::MatrixXd da = lift_block_diagonal(a, dim), db = lift_block_diagonal(b, dim);
    CHECK((lift_block_diagonal(bracket(a, b), dim) - (da * db - db * da)).norm() == 0.0);
    CHECK((dense(bracket(a, b)) - (dense(a) * dense(b) - dense(b) * dense(a))).norm() == 0.0);
  }
}

TEST_CASE("rank condition examples") {
  const auto simplex = Configuration::from_agents(std::vector<std::vector<double>>{{0, 0}, {1, 0}, {0, 1}});
  const auto r = lie_algebra_at(simplex, Digraph::cycle(3));
  CHECK(r.dim == 6);
  CHECK(r.required == 6);
  CHECK(r.passes);
  CHECK(r.per_agent_ranks == std::vector<int>{2, 2, 2});
  CHECK(r.closure_edges == 6);

  const auto coincident = Configuration::from_agents(std::vector<std::vector<double>>{{1, 1}, {1, 1}, {1, 1}});
  CHECK(lie_algebra_at(coincident, Digraph::complete(3)).dim == 0);

  const auto collinear = Configuration::from_agents(std::vector<std::vector<double>>{{0, 0}, {1, 0}, {2, 0}, {5, 0}});
  const auto c = lie_algebra_at(collinear, Digraph::complete(4));
  CHECK(c.dim <= 4);
  CHECK_FALSE(c.passes);

  const auto pair = Configuration::from_agents(std::vector<std::vector<double>>{{0, 0}, {1, 3}});
  CHECK_FALSE(larc_passes(pair, Digraph::complete(2)));

  CHECK_THROWS_AS(lie_algebra_at(simplex, Digraph::complete(4)), Error);
}

TEST_CASE("per-agent, stacked and bracketed ranks agree") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const int num_agents = 2 + static_cast<int>(rng() % 7);
    const int n = 1 + static_cast<int>(rng() % 3);
    const Digraph g = oracle::random_weakly_connected(num_agents, rng, 0.2);
    const int k = static_cast<int>(rng() % (std::min(n, num_agents - 1) + 1));
    const auto p = sample_configuration(n, num_agents, rng() % 3 ? SampleKind::uniform() : SampleKind::rank(k), rng());
    LarcReport r;
    if (num_agents <= 5) {
      REQUIRE_NOTHROW(r = lie_algebra_at(p, g, {kDefaultRankTolerance, true}));
      CHECK(*r.slow_path_dim == r.dim);
      CHECK(*r.bracket_path_dim == r.dim);
    } else {
      r = lie_algebra_at(p, g);
    }
    CHECK(r.dim == stacked_rank(p, g));
  }
}

TEST_CASE("strongly connected graphs on n+1 agents reach n(n+1)") {
  std::mt19937_64 rng(3);
  for (int n = 1; n <= 3; ++n)
    for (int trial = 0; trial < 20; ++trial) {
      const auto p = sample_configuration(n, n + 1, SampleKind::uniform(), rng());
      CHECK(lie_algebra_at(p, Digraph::cycle(n + 1)).dim == n * (n + 1));
    }
}

TEST_CASE("degenerate maximal components fail the rank condition") {
  // Maximal component {3,4,5,6} made collinear in the plane.
  const Digraph g(6, {{0, 1}, {1, 0}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 2}});
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd rows = oracle::random_matrix(6, 2, rng);
    const Eigen::RowVector2d dir(oracle::uniform(rng), oracle::uniform(rng));
    for (int a = 2; a < 6; ++a) rows.row(a) = rows.row(2) + oracle::uniform(rng) * dir;
    const auto p = Configuration::from_agents(rows);
    const auto r = lie_algebra_at(p, g);
    CHECK_FALSE(r.passes);
    CHECK(r.dim < 12);
  }
}

TEST_CASE("rank-k configurations in canonical position give at most kN") {
  // Coordinates past k are shared by every agent, so no field moves them.
  std::mt19937_64 rng(41);
  const int n = 3, agents = 5;
  for (int k = 1; k < n; ++k)
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::MatrixXd rows = oracle::random_matrix(agents, n, rng);
      for (int c = k; c < n; ++c) rows.col(c).setConstant(oracle::uniform(rng));
      const auto p = Configuration::from_agents(rows);
      REQUIRE(configuration_rank(p) == k);
      const auto r = lie_algebra_at(p, Digraph::complete(agents), {kDefaultRankTolerance, true});
      CHECK(r.dim <= k * agents);
      CHECK(r.dim == k * agents);
      CHECK(r.slow_path_dim == r.dim);
    }
}

TEST_CASE("witness basis") {
  std::mt19937_64 rng(5);
  SUBCASE("strongly connected, N = n + 2") {
    for (int n = 1; n <= 3; ++n) {
      const auto p = sample_configuration(n, n + 2, SampleKind::uniform(), rng());
      const auto w = construct_witness_basis(p, Digraph::cycle(n + 2));
      CHECK(w.vectors.size() == static_cast<std::size_t>(n * (n + 2)));
      int simplex = 0;
      for (const auto& l : w.labels) simplex += l.block == WitnessLabel::Block::Simplex;
      CHECK(simplex == n * (n + 1));
      CHECK(numeric_rank(w.as_matrix()) == n * (n + 2));
      // Simplex vectors live on simplex agents, attachment vectors on the attached agent.
      for (std::size_t a = 0; a < w.vectors.size(); ++a)
        for (std::size_t b = 0; b < w.vectors.size(); ++b)
          if (w.labels[a].block != w.labels[b].block) CHECK(std::abs(w.vectors[a].dot(w.vectors[b])) <= 1e-12);
    }
  }
  SUBCASE("two maximal components give two orthogonal simplex blocks") {
    // {1,2,3,4} -> {5,6,7,8} and {1,2,3,4} -> {9,10,11,12}, each a 4-cycle.
    std::vector<Edge> edges;
    for (int b = 0; b < 3; ++b)
      for (int k = 0; k < 4; ++k) edges.push_back({4 * b + k, 4 * b + (k + 1) % 4});
    edges.push_back({0, 4});
    edges.push_back({1, 8});
    const Digraph g(12, edges);
    const auto p = sample_configuration(2, 12, SampleKind::uniform(), 17);
    const auto w = construct_witness_basis(p, g);
    CHECK(w.simplices.size() == 2);
    CHECK(w.vectors.size() == 24);
    CHECK(numeric_rank(w.as_matrix()) == 24);
    for (std::size_t a = 0; a < w.vectors.size(); ++a)
      for (std::size_t b = 0; b < w.vectors.size(); ++b) {
        const auto &la = w.labels[a], &lb = w.labels[b];
        if (la.block == WitnessLabel::Block::Simplex && lb.block == WitnessLabel::Block::Simplex && la.owner != lb.owner)
          CHECK(std::abs(w.vectors[a].dot(w.vectors[b])) <= 1e-12);
      }
    CHECK(to_string(w.labels.front()).rfind("simplex:c", 0) == 0);
  }
  SUBCASE("gated on the structural verdict and on Q") {
    const auto p = sample_configuration(2, 3, SampleKind::uniform(), 1);
    try {
      construct_witness_basis(p, Digraph::cycle(3));
      FAIL("expected StructuralFailure");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::StructuralFailure);
    }
    const auto flat = sample_configuration(2, 5, SampleKind::rank(1), 1);
    try {
      construct_witness_basis(flat, Digraph::complete(5));
      FAIL("expected NotInQ");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NotInQ);
    }
  }
}

TEST_CASE("witness span equals the Lie algebra at p") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const int num_agents = 4 + static_cast<int>(rng() % 4);
    const Digraph g = oracle::random_weakly_connected(num_agents, rng, 0.35);
    if (structural_verdict(g, 2).kind != VerdictKind::GenericallyControllable) continue;
    const auto p = sample_configuration(2, num_agents, SampleKind::uniform(), rng());
    const auto w = construct_witness_basis(p, g);
    CHECK(numeric_rank(w.as_matrix()) == 2 * num_agents);
    CHECK(stacked_rank(p, g) == 2 * num_agents);
  }
}
