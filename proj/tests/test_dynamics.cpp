#include <doctest.h>

#include <cmath>
#include <random>

#include "formctl/configspace.hpp"
#include "formctl/dynamics.hpp"
#include "formctl/errors.hpp"
#include "oracles.hpp"

using namespace formctl;

namespace {

ControlValues random_controls(const Digraph& g, std::mt19937_64& rng, double scale = 1.0) {
  ControlValues u;
  for (const auto& e : g.edges()) u[e] = scale * oracle::uniform(rng);
  return u;
}

// Truncated Taylor series with scaling and squaring; enough for small test matrices.
Eigen::MatrixXd taylor_exp(const Eigen::MatrixXd& m) {
  int squarings = 0;
  double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  while (norm > 0.1) {
    norm /= 2;
    ++squarings;
  }
  const Eigen::MatrixXd a = m / std::pow(2.0, squarings);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(m.rows(), m.cols()), sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * a / k;
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

}  // namespace

TEST_CASE("control matrix") {
  const Digraph g = Digraph::path(3);
  const Eigen::MatrixXd m = control_matrix(g, {{{0, 1}, 2.0}, {{1, 2}, -1.0}});
  Eigen::Matrix3d expected;
  expected << -2, 2, 0, 0, 1, -1, 0, 0, 0;
  CHECK(m == expected);
  CHECK_THROWS_AS(control_matrix(g, {{{2, 0}, 1.0}}), Error);
}

TEST_CASE("matrix exponential matches a Taylor oracle") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 6);
    const Eigen::MatrixXd m = 3.0 * oracle::random_matrix(n, n, rng);
    const Eigen::MatrixXd e = matrix_exponential(m);
    CHECK((e - taylor_exp(m)).norm() <= 1e-10 * e.norm());
  }
}

TEST_CASE("constant flows") {
  std::mt19937_64 rng(2);
  const Digraph g = Digraph::complete(4);
  const auto p = sample_configuration(2, 4, SampleKind::uniform(), 3);
  CHECK(flow_constant(g, {}, p, 1.5).coords() == p.coords());
  CHECK_THROWS_AS(flow_constant(g, {}, p, -1.0), Error);

  SUBCASE("two agents on a line decay exponentially") {
    const Digraph e12(2, {{0, 1}});
    for (double h : {0.0, 0.1, 1.0, 3.7}) {
      const auto q = flow_constant(e12, {{{0, 1}, 1.0}}, Configuration::from_agents(std::vector<std::vector<double>>{{5.0}, {-1.0}}), h);
      CHECK(std::abs(q.agent(0)[0] - (-1.0 + 6.0 * std::exp(-h))) <= 1e-10);
      CHECK(std::abs(q.agent(1)[0] + 1.0) <= 1e-10);
    }
  }
  SUBCASE("semigroup") {
    for (int trial = 0; trial < 50; ++trial) {
      const auto u = random_controls(g, rng);
      const double h1 = oracle::uniform(rng, 0, 1), h2 = oracle::uniform(rng, 0, 1);
      const auto a = flow_constant(g, u, flow_constant(g, u, p, h1), h2);
      const auto b = flow_constant(g, u, p, h1 + h2);
      CHECK((a.coords() - b.coords()).norm() <= 1e-10);
    }
  }
  SUBCASE("rank never increases") {
    for (int trial = 0; trial < 50; ++trial) {
      const int k = static_cast<int>(rng() % 3);
      const auto q = sample_configuration(2, 4, SampleKind::rank(k), rng());
      const auto r = flow_constant(g, random_controls(g, rng, 3.0), q, 1.0);
      CHECK(configuration_rank(r) <= k);
    }
  }
}

TEST_CASE("graph schedules") {
  const GraphSchedule s({{0.0, Digraph::complete(3)}, {0.5, Digraph::cycle(3)}}, 1.0);
  CHECK(s.segment_index(0.0) == 0);
  CHECK(s.segment_index(0.4999) == 0);
  CHECK(s.segment_index(0.5) == 1);
  CHECK(s.active(0.9) == Digraph::cycle(3));
  CHECK(s.switching_times() == std::vector<double>{0.5});
  CHECK_THROWS_AS(GraphSchedule({{0.1, Digraph::cycle(3)}}, 1.0), Error);
  CHECK_THROWS_AS(GraphSchedule({{0.0, Digraph::cycle(3)}, {0.0, Digraph::cycle(3)}}, 1.0), Error);
  CHECK_THROWS_AS(GraphSchedule({{0.0, Digraph::cycle(3)}, {0.5, Digraph::cycle(4)}}, 1.0), Error);
  CHECK_THROWS_AS(GraphSchedule({{0.0, Digraph::cycle(3)}, {1.0, Digraph::cycle(3)}}, 1.0), Error);
}

TEST_CASE("control schedule validation") {
  const GraphSchedule s({{0.0, Digraph::complete(3)}, {0.5, Digraph::path(3)}}, 1.0);
  ControlSchedule ok{{0.0, 0.5, 1.0}, {{{{2, 0}, 1.0}}, {{{0, 1}, 1.0}}}};
  CHECK_NOTHROW(ok.validate(s));
  ControlSchedule straddle{{0.0, 0.6, 1.0}, {{}, {}}};
  try {
    straddle.validate(s);
    FAIL("expected InconsistentSchedule");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InconsistentSchedule);
  }
  ControlSchedule inactive{{0.0, 0.5, 1.0}, {{}, {{{2, 0}, 1.0}}}};
  try {
    inactive.validate(s);
    FAIL("expected UnknownEdge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownEdge);
  }
  ControlSchedule short_grid{{0.0, 0.5}, {{}}};
  CHECK_THROWS_AS(short_grid.validate(s), Error);
}

TEST_CASE("simulation of piecewise-constant controls") {
  std::mt19937_64 rng(4);
  const Digraph g = Digraph::complete(4);
  const auto schedule = GraphSchedule::constant(g, 1.0);
  const auto p = sample_configuration(2, 4, SampleKind::uniform(), 5);

  SUBCASE("zero controls keep p exactly") {
    const ControlSchedule zero{{0.0, 0.5, 1.0}, {{}, {}}};
    const auto traj = simulate(schedule, zero, p, 0.1);
    for (const auto& q : traj.states) CHECK(q.coords() == p.coords());
    CHECK(traj.times.front() == 0.0);
    CHECK(traj.times.back() == 1.0);
  }
  SUBCASE("constant controls match one exact flow") {
    const auto u = random_controls(g, rng);
    const ControlSchedule c{{0.0, 1.0}, {u}};
    const auto traj = simulate(schedule, c, p, 0.01);
    CHECK((traj.states.back().coords() - flow_constant(g, u, p, 1.0).coords()).norm() <= 1e-10);
  }
  SUBCASE("refinement of the grid does not change the endpoint") {
    for (int trial = 0; trial < 20; ++trial) {
      const auto u1 = random_controls(g, rng), u2 = random_controls(g, rng);
      const ControlSchedule coarse{{0.0, 0.4, 1.0}, {u1, u2}};
      const ControlSchedule fine{{0.0, 0.1, 0.4, 0.7, 0.9, 1.0}, {u1, u1, u2, u2, u2}};
      const auto a = simulate(schedule, coarse, p, 0.1).states.back();
      const auto b = simulate(schedule, fine, p, 0.1).states.back();
      const auto direct = flow_constant(g, u2, flow_constant(g, u1, p, 0.4), 0.6);
      CHECK((a.coords() - b.coords()).norm() <= 1e-10);
      CHECK((a.coords() - direct.coords()).norm() <= 1e-10);
    }
  }
  SUBCASE("samples include every breakpoint") {
    const ControlSchedule c{{0.0, 0.33, 1.0}, {{}, {}}};
    const auto traj = simulate(schedule, c, p, 0.1);
    CHECK(std::find(traj.times.begin(), traj.times.end(), 0.33) != traj.times.end());
    CHECK_THROWS_AS(simulate(schedule, c, p, 0.5), Error);
  }
}

TEST_CASE("feedback simulation") {
  const Digraph g = Digraph::complete(4);
  const auto schedule = GraphSchedule::constant(g, 3.0);
  const auto p = sample_configuration(2, 4, SampleKind::uniform(), 6);
  const FeedbackLaw all_ones = [&](double, const Configuration&) {
    ControlValues u;
    for (const auto& e : g.edges()) u[e] = 1.0;
    return u;
  };
  const auto traj = simulate(schedule, all_ones, p, 0.01);
  // u = 1 on K_N is the consensus flow; the exact solution is available.
  ControlValues ones;
  for (const auto& e : g.edges()) ones[e] = 1.0;
  CHECK((traj.states.back().coords() - flow_constant(g, ones, p, 3.0).coords()).norm() <= 1e-8);
  auto spread = [](const Configuration& q) {
    double d = 0;
    for (int i = 0; i < q.num_agents(); ++i)
      for (int j = 0; j < q.num_agents(); ++j) d = std::max(d, (q.agent(i) - q.agent(j)).norm());
    return d;
  };
  for (std::size_t s = 1; s < traj.states.size(); ++s) CHECK(spread(traj.states[s]) <= spread(traj.states[s - 1]) + 1e-12);
}
