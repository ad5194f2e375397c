#include <doctest.h>

#include <random>

#include "formctl/digraph.hpp"
#include "formctl/errors.hpp"
#include "formctl/liealg.hpp"
#include "oracles.hpp"

using namespace formctl;

namespace {

ZeroRowSumMatrix A(int i, int j, int n) { return edge_generator(i - 1, j - 1, n); }
EdgeGenerator G(int i, int j, int n) { return EdgeGenerator::make(i - 1, j - 1, n); }

ZeroRowSumMatrix random_zero_row_sum(int n, std::mt19937_64& rng, int range = 3) {
  std::vector<std::int64_t> e(n * n, 0);
  std::uniform_int_distribution<int> d(-range, range);
  for (int r = 0; r < n; ++r) {
    std::int64_t sum = 0;
    for (int c = 0; c < n; ++c) {
      if (c == r) continue;
      e[r * n + c] = d(rng);
      sum += e[r * n + c];
    }
    e[r * n + r] = -sum;
  }
  return ZeroRowSumMatrix::from_entries(n, e);
}

Eigen::MatrixXd to_double(const ZeroRowSumMatrix& m) {
  Eigen::MatrixXd out(m.size(), m.size());
  for (int r = 0; r < m.size(); ++r)
    for (int c = 0; c < m.size(); ++c) out(r, c) = static_cast<double>(m(r, c));
  return out;
}

// Rank of flattened matrices by floating-point LU; exact for these small integer inputs.
int float_rank(const std::vector<ZeroRowSumMatrix>& ms) {
  if (ms.empty()) return 0;
  const int n = ms.front().size();
  Eigen::MatrixXd stack(n * n, static_cast<Eigen::Index>(ms.size()));
  for (std::size_t k = 0; k < ms.size(); ++k) {
    Eigen::MatrixXd d = to_double(ms[k]);
    stack.col(static_cast<Eigen::Index>(k)) = Eigen::Map<Eigen::VectorXd>(d.data(), d.size());
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(stack);
  lu.setThreshold(1e-9);
  return static_cast<int>(lu.rank());
}

}  // namespace

TEST_CASE("edge generators") {
  CHECK(A(1, 2, 2) == ZeroRowSumMatrix::from_entries(2, {-1, 1, 0, 0}));
  CHECK(A(2, 1, 2) == ZeroRowSumMatrix::from_entries(2, {0, 0, 1, -1}));
  CHECK_THROWS_AS(EdgeGenerator::make(1, 1, 3), Error);
  CHECK_THROWS_AS(EdgeGenerator::make(0, 3, 3), Error);
  CHECK_THROWS_AS(ZeroRowSumMatrix::from_entries(2, {1, 0, 0, 0}), Error);
  for (int n = 2; n <= 5; ++n)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) {
          const auto m = edge_generator(i, j, n);
          for (int r = 0; r < n; ++r) {
            std::int64_t s = 0;
            for (int c = 0; c < n; ++c) s += m(r, c);
            CHECK(s == 0);
          }
        }
}

TEST_CASE("dense bracket examples") {
  CHECK(bracket(A(1, 2, 3), A(2, 3, 3)) == A(1, 3, 3) - A(1, 2, 3));
  CHECK(bracket(A(1, 2, 3), A(1, 3, 3)) == A(1, 2, 3) - A(1, 3, 3));
  CHECK(bracket(A(1, 2, 4), A(3, 4, 4)).is_zero());
  CHECK(bracket(A(1, 2, 3), A(3, 1, 3)) == A(3, 1, 3) - A(3, 2, 3));
  CHECK(bracket(A(1, 2, 2), A(2, 1, 2)) == A(2, 1, 2) - A(1, 2, 2));
  CHECK_THROWS_AS(bracket(A(1, 2, 2), A(1, 2, 3)), Error);
}

TEST_CASE("bracket agrees with floating-point commutator and preserves zero row sums") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const auto a = random_zero_row_sum(n, rng), b = random_zero_row_sum(n, rng);
    const auto c = bracket(a, b);
    const Eigen::MatrixXd da = to_double(a), db = to_double(b);
    CHECK((to_double(c) - (da * db - db * da)).norm() == 0.0);
    CHECK((to_double(c).rowwise().sum()).norm() == 0.0);
  }
}

TEST_CASE("Jacobi identity") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const auto a = random_zero_row_sum(n, rng), b = random_zero_row_sum(n, rng), c = random_zero_row_sum(n, rng);
    CHECK((bracket(a, bracket(b, c)) + bracket(b, bracket(c, a)) + bracket(c, bracket(a, b))).is_zero());
  }
}

TEST_CASE("checked arithmetic reports overflow") {
  const std::int64_t big = std::int64_t{1} << 62;
  const auto m = ZeroRowSumMatrix::from_entries(2, {-big, big, 0, 0});
  try {
    (void)(m + m);
    FAIL("expected overflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ArithmeticOverflow);
  }
}

TEST_CASE("decompose and densify are inverse") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const auto m = random_zero_row_sum(n, rng);
    CHECK(densify(decompose(m), n) == m);
  }
}

TEST_CASE("structural bracket examples") {
  GeneratorCombination e1;
  e1.terms = {{{0, 2}, 1}, {{0, 1}, -1}};
  CHECK(structural_bracket(G(1, 2, 4), G(2, 3, 4)) == e1);
  GeneratorCombination e2;
  e2.terms = {{{1, 3}, 1}, {{1, 2}, -1}};
  CHECK(structural_bracket(G(2, 3, 4), G(3, 4, 4)) == e2);
  CHECK(structural_bracket(G(1, 2, 4), G(3, 4, 4)).terms.empty());
  try {
    structural_bracket(G(1, 2, 3), G(2, 1, 3));
    FAIL("expected DegenerateBracket");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateBracket);
  }
}

TEST_CASE("structural bracket equals the dense bracket for every generator pair, N <= 6") {
  for (int n = 2; n <= 6; ++n)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            if (i == j || k == l) continue;
            const auto a = EdgeGenerator::make(i, j, n), b = EdgeGenerator::make(k, l, n);
            const auto dense = bracket(a.dense(), b.dense());
            if (j == k && l == i) {
              CHECK_THROWS_AS(structural_bracket(a, b), Error);
              continue;
            }
            CHECK(densify(structural_bracket(a, b), n) == dense);
          }
}

TEST_CASE("generators of a graph are independent") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const Digraph g = oracle::random_weakly_connected(2 + static_cast<int>(rng() % 6), rng, 0.4);
    CHECK(generator_basis(g).dimension() == g.num_edges());
  }
}

TEST_CASE("exact span") {
  ExactSpan s(3);
  CHECK(s.insert({2, 4, 6}));
  CHECK_FALSE(s.insert({1, 2, 3}));
  CHECK(s.contains({-3, -6, -9}));
  CHECK(s.insert({0, 1, 0}));
  CHECK(s.contains({1, 0, 3}));
  CHECK_FALSE(s.contains({0, 0, 1}));
  CHECK(s.rank() == 2);
}

TEST_CASE("span equality") {
  CHECK(span_equal(LieBasis::spanning(2, {A(1, 2, 2)}), LieBasis::spanning(2, {A(1, 2, 2).scaled(2)})));
  CHECK_FALSE(span_equal(LieBasis::spanning(2, {A(1, 2, 2)}), LieBasis::spanning(2, {A(2, 1, 2)})));
}

TEST_CASE("Lie closure examples") {
  const auto path = lie_closure(generators_of(Digraph::path(4)));
  CHECK(path.dimension() == 6);
  CHECK(span_equal(path, generator_basis(transitive_closure(Digraph::path(4)))));
  CHECK(lie_closure(generators_of(Digraph::complete(3))).dimension() == 6);
  CHECK(lie_closure({EdgeGenerator::make(0, 1, 2)}).dimension() == 1);
  CHECK_THROWS_AS(lie_closure({}), Error);
}

TEST_CASE("Lie closure equals the closure-edge algebra on random graphs") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const Digraph g = oracle::random_weakly_connected(n, rng, 0.15);
    const auto r = oracle::reach(g);
    int closure_edges = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) closure_edges += (i != j && r[i][j]);

    const auto dense = lie_closure(generators_of(g), BracketRoute::Dense);
    const auto structural = lie_closure(generators_of(g), BracketRoute::Structural);
    CHECK(dense.dimension() == static_cast<std::size_t>(closure_edges));
    CHECK(float_rank(dense.elements()) == closure_edges);
    // Support lies on closure edges, so with the right dimension the spans coincide.
    for (const auto& m : dense.elements())
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j && m(i, j) != 0) CHECK(r[i][j]);
    // Every closure generator is a member (exact test).
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && r[i][j]) CHECK(dense.contains(edge_generator(i, j, n)));
    CHECK(dense.elements() == structural.elements());
  }
}
