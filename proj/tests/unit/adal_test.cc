#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <random>

#include "beamflow/adal.h"
#include "beamflow/error.h"
#include "beamflow/harness.h"
#include "oracles.h"

namespace beamflow {
namespace {

constexpr double kLn2 = std::numbers::ln2;

std::vector<double> random_point(std::mt19937_64& rng, size_t n, double hi) {
  std::uniform_real_distribution<double> u(0.0, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

TEST(LocalValue, ZeroStateIsWeightSum) {
  const FlowProblem p = testing::paper_problem();
  const NodeLocalView v =
      build_local_view(p, 14, p.zero_flow(), p.zero_dual());
  double w = 0.0;
  for (double x : v.weights()) w += x;
  const std::vector<double> zero(v.num_vars(), 0.0);
  EXPECT_NEAR(local_al_value(v, zero, 1.0), w, 1e-12 * w);
}

TEST(LocalValue, TwoNodeHandExpansion) {
  const double rate = 2.0, rho = 1.5;
  const FlowProblem p = testing::two_node_problem(rate);
  DualState lambda = p.zero_dual();
  lambda.at(0, 0) = 0.7;
  lambda.at(1, 0) = -0.2;
  const NodeLocalView v = build_local_view(p, 0, p.zero_flow(), lambda);
  const double w = p.weight(0);
  for (double t : {0.0, 0.5, 2.0, 3.1}) {
    const double expected = w * std::pow(2.0, t) + t * (0.7 - (-0.2)) +
                            0.5 * rho * 2.0 * (t - rate) * (t - rate);
    EXPECT_NEAR(local_al_value(v, std::vector<double>{t}, rho), expected,
                1e-12 * expected);
  }
}

TEST(LocalValue, MatchesDenseOracle) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const FlowProblem p = testing::random_problem(rng, 5 + trial % 2, 3);
    const testing::DenseAl dense(p);
    const FlowState x = testing::random_flow(rng, p, 2.0);
    const DualState l = testing::random_dual(rng, p, 3.0);
    const double rho = std::array{0.1, 1.0, 10.0}[trial % 3];
    for (int i = 0; i < p.num_nodes(); ++i) {
      const NodeLocalView v = build_local_view(p, i, x, l);
      const std::vector<double> c = random_point(rng, v.num_vars(), 2.0);
      const std::vector<double> c2 = random_point(rng, v.num_vars(), 2.0);
      const double local = local_al_value(v, c, rho);
      const double ref = dense.node_value(i, x, l, rho, c);
      EXPECT_NEAR(local, ref, 1e-9 * std::abs(ref));
      // Differences agree with the full-network form too.
      FlowState xa = x, xb = x;
      const Topology& t = p.topology();
      const int mc = p.num_commodities();
      for (int a = t.first_out(i); a < t.end_out(i); ++a)
        for (int m = 0; m < mc; ++m) {
          const size_t k = (a - t.first_out(i)) * mc + m;
          xa.at(a, m) = c[k];
          xb.at(a, m) = c2[k];
        }
      const double full_diff =
          dense.full_value(xa, l, rho) - dense.full_value(xb, l, rho);
      const double local_diff = local - local_al_value(v, c2, rho);
      EXPECT_NEAR(local_diff, full_diff,
                  1e-9 * std::max(1.0, std::abs(dense.full_value(xa, l, rho))));
    }
  }
}

TEST(LocalGradient, ZeroStateIsObjectiveTerm) {
  const FlowProblem p = testing::paper_problem();
  const NodeLocalView v =
      build_local_view(p, 14, p.zero_flow(), p.zero_dual());
  const std::vector<double> zero(v.num_vars(), 0.0);
  const std::vector<double> g = local_al_gradient(v, zero, 1.0);
  for (int a = 0; a < v.num_local_arcs(); ++a)
    for (int m = 0; m < 2; ++m)
      EXPECT_NEAR(g[a * 2 + m], kLn2 * v.weights()[a], 1e-15);
}

TEST(LocalGradient, MatchesDenseOracleAndFiniteDifferences) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 60; ++trial) {
    const FlowProblem p = testing::random_problem(rng, 5, 3);
    const testing::DenseAl dense(p);
    const FlowState x = testing::random_flow(rng, p, 2.0);
    const DualState l = testing::random_dual(rng, p, 3.0);
    const double rho = std::array{0.1, 1.0, 10.0}[trial % 3];
    for (int i = 0; i < p.num_nodes(); ++i) {
      const NodeLocalView v = build_local_view(p, i, x, l);
      const std::vector<double> c = random_point(rng, v.num_vars(), 2.0);
      const std::vector<double> g = local_al_gradient(v, c, rho);
      const Eigen::VectorXd ref = dense.node_gradient(i, x, l, rho, c);
      ASSERT_EQ(static_cast<long>(g.size()), ref.size());
      const std::vector<double> fd = testing::finite_difference_gradient(
          [&](std::span<const double> y) { return local_al_value(v, y, rho); },
          c);
      double gmax = 1.0;
      for (double e : g) gmax = std::max(gmax, std::abs(e));
      for (size_t k = 0; k < g.size(); ++k) {
        EXPECT_NEAR(g[k], ref(k), 1e-10);
        EXPECT_LT(std::abs(g[k] - fd[k]) / gmax, 1e-6);
      }
    }
  }
}

TEST(HessianDiag, PaperModeIsConstant) {
  std::mt19937_64 rng(23);
  const FlowProblem p = testing::random_problem(rng, 6, 2);
  const NodeLocalView v = build_local_view(p, 0, testing::random_flow(rng, p, 3),
                                           p.zero_dual());
  const std::vector<double> c = random_point(rng, v.num_vars(), 4.0);
  for (double d : local_al_hessian_diag(v, c, 2.5, Scaling::kPaperDiagonal))
    EXPECT_EQ(d, 5.0);
}

TEST(HessianDiag, FullModeAtZeroWithUnitWeight) {
  NetworkScenario s;
  s.nodes = {{0, {0, 0}}, {1, {1, 0}}};
  s.station = {0, 1};
  s.arcs = {{0, 1}};
  const FlowProblem p = build_problem(s, {{0, 1, 1.0}});
  const NodeLocalView v = build_local_view(p, 0, p.zero_flow(), p.zero_dual());
  const auto d = local_al_hessian_diag(v, std::vector<double>{0.0}, 1.0,
                                       Scaling::kFullDiagonal);
  EXPECT_NEAR(d[0], 2.0 + kLn2 * kLn2, 1e-15);
  EXPECT_THROW(local_al_hessian_diag(v, std::vector<double>{0.0}, 1.0,
                                     Scaling::kUnscaled),
               DomainError);
}

TEST(HessianDiag, FullModeMatchesDenseHessianAndReducedHessianIsDefinite) {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 30; ++trial) {
    const FlowProblem p = testing::random_problem(rng, 6, 3);
    const testing::DenseAl dense(p);
    const FlowState x = testing::random_flow(rng, p, 2.0);
    const double rho = std::array{0.1, 1.0, 10.0}[trial % 3];
    for (int i = 0; i < p.num_nodes(); ++i) {
      const NodeLocalView v = build_local_view(p, i, x, p.zero_dual());
      const std::vector<double> c = random_point(rng, v.num_vars(), 2.0);
      const Eigen::MatrixXd h = dense.node_hessian(i, x, rho, c);
      const auto d = local_al_hessian_diag(v, c, rho, Scaling::kFullDiagonal);
      for (size_t k = 0; k < d.size(); ++k)
        EXPECT_NEAR(d[k], h(k, k), 1e-10 * std::max(1.0, h(k, k)));
      const Eigen::VectorXd eig =
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues();
      EXPECT_GT(eig.minCoeff(), 0.0);
    }
  }
}

TEST(ScaledDirection, Cases) {
  const double rho = 1.7;
  const std::vector<double> v{0.5, -1.0, 2.0};
  std::vector<double> g, diag(3, 2.0 * rho);
  for (double e : v) g.push_back(2.0 * rho * e);
  const auto dir = scaled_direction(g, diag, Scaling::kPaperDiagonal);
  for (size_t k = 0; k < v.size(); ++k) EXPECT_NEAR(dir[k], -v[k], 1e-15);

  const std::vector<double> zero(3, 0.0);
  for (double d : scaled_direction(zero, diag, Scaling::kPaperDiagonal))
    EXPECT_EQ(d, 0.0);

  EXPECT_EQ(scaled_direction(g, {}, Scaling::kUnscaled),
            (std::vector<double>{-g[0], -g[1], -g[2]}));

  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> u(-3, 3), pos(0.1, 5);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> gg(4), dd(4);
    for (int k = 0; k < 4; ++k) {
      gg[k] = u(rng);
      dd[k] = pos(rng);
    }
    const auto d = scaled_direction(gg, dd, Scaling::kFullDiagonal);
    double dot = 0.0;
    for (int k = 0; k < 4; ++k) dot += d[k] * gg[k];
    EXPECT_LT(dot, 0.0);
  }
  EXPECT_THROW(scaled_direction(g, std::vector<double>{1.0, 0.0, 1.0},
                                Scaling::kPaperDiagonal),
               DomainError);
}

TEST(InnerSolve, StationaryStartReturnsImmediately) {
  const FlowProblem p = testing::two_node_problem(2.0);
  // x = 0 with a large price on the head makes the projected gradient zero.
  DualState l = p.zero_dual();
  l.at(1, 0) = -100.0;
  const NodeLocalView v = build_local_view(p, 0, p.zero_flow(), l);
  AdalConfig c;
  const InnerResult r = armijo_inner_solve(v, c);
  EXPECT_EQ(r.stats.iterations, 0);
  EXPECT_TRUE(r.stats.converged);
  EXPECT_EQ(r.x, std::vector<double>{0.0});
}

TEST(InnerSolve, OneDimensionalMatchesBisection) {
  for (double rate : {0.5, 2.0, 6.0}) {
    for (double rho : {0.1, 1.0, 10.0}) {
      for (Scaling mode : {Scaling::kPaperDiagonal, Scaling::kFullDiagonal,
                           Scaling::kUnscaled}) {
        const FlowProblem p = testing::two_node_problem(rate);
        const double w = p.weight(0);
        const NodeLocalView v =
            build_local_view(p, 0, p.zero_flow(), p.zero_dual());
        AdalConfig c;
        c.rho = rho;
        c.scaling = mode;
        // Tighter tolerances drown the Armijo test in rounding noise.
        c.inner_tol = 1e-6;
        c.inner_max_iters = 100000;
        const InnerResult r = armijo_inner_solve(v, c);
        // Stationarity of w 2^x + rho (x - R)^2.
        const double root = testing::bisect(
            [&](double x) {
              return kLn2 * w * std::pow(2.0, x) + 2.0 * rho * (x - rate);
            },
            0.0, rate);
        const double expected =
            kLn2 * w + 2.0 * rho * (0.0 - rate) >= 0.0 ? 0.0 : root;
        EXPECT_NEAR(r.x[0], expected, 1e-5)
            << rate << " " << rho << " " << to_string(mode);
        // Accepted steps strictly decrease the local value.
        for (size_t k = 1; k < r.stats.values.size(); ++k)
          EXPECT_LT(r.stats.values[k], r.stats.values[k - 1]);
      }
    }
  }
}

TEST(InnerSolve, StatsAreConsistent) {
  std::mt19937_64 rng(26);
  const FlowProblem p = testing::random_problem(rng, 6, 3);
  const NodeLocalView v = build_local_view(p, 2, testing::random_flow(rng, p, 2),
                                           testing::random_dual(rng, p, 2));
  AdalConfig c;
  c.inner_max_iters = 7;
  c.inner_tol = 1e-14;
  const InnerResult r = armijo_inner_solve(v, c);
  EXPECT_EQ(r.stats.iterations, 7);
  EXPECT_EQ(r.stats.steps.size(), 7u);
  EXPECT_EQ(r.stats.trials.size(), 7u);
  EXPECT_EQ(r.stats.values.size(), 8u);
  for (size_t t = 0; t < r.stats.steps.size(); ++t)
    EXPECT_DOUBLE_EQ(r.stats.steps[t], std::pow(0.5, r.stats.trials[t] - 1));
  for (double x : r.x) EXPECT_GE(x, 0.0);
}

TEST(InnerSolve, TooManyTrialsRaisesLineSearchError) {
  const FlowProblem p = testing::paper_problem();
  const NodeLocalView v = build_local_view(p, 0, p.zero_flow(), p.zero_dual());
  AdalConfig c;
  c.scaling = Scaling::kUnscaled;
  c.armijo.initial_step = 1e3;
  c.armijo.max_trials = 2;
  try {
    armijo_inner_solve(v, c);
    FAIL() << "expected a line-search failure";
  } catch (const LineSearchError& e) {
    EXPECT_EQ(e.node(), 0);
  }
}

TEST(OuterStep, ZeroTauIsIdempotent) {
  std::mt19937_64 rng(27);
  const FlowProblem p = testing::random_problem(rng, 6, 2);
  AdalState s = AdalState::zero(p);
  s.x = testing::random_flow(rng, p, 2.0);
  s.lambda = testing::random_dual(rng, p, 2.0);
  const FlowState x0 = s.x;
  const DualState l0 = s.lambda;
  AdalConfig c;
  c.tau = 0.0;
  c.threads = 1;
  adal_outer_step(s, p, c);
  EXPECT_EQ(s.x, x0);
  EXPECT_EQ(s.lambda, l0);
  EXPECT_EQ(s.k, 1);
}

TEST(OuterStep, ConservingNodeKeepsMultiplier) {
  const FlowProblem p = testing::paper_problem();
  AdalState s = AdalState::zero(p);
  s.x = route_ospf(p).flow;
  AdalConfig c;
  c.threads = 1;
  adal_outer_step(s, p, c);
  // Node 20 is far from both routes; its neighborhood stays empty of flow.
  EXPECT_EQ(s.lambda.at(20, 0), 0.0);
  EXPECT_EQ(s.lambda.at(20, 1), 0.0);
}

TEST(OuterStep, TwoNodeConvergesWithin200) {
  const FlowProblem p = testing::two_node_problem(3.0);
  AdalState s = AdalState::zero(p);
  AdalConfig c;
  c.rho = 1.0;
  c.tau = 0.45;
  c.threads = 1;
  c.inner_tol = 1e-6;
  DualState prev = s.lambda;
  for (int k = 0; k < 200; ++k) {
    prev = s.lambda;
    adal_outer_step(s, p, c);
  }
  EXPECT_NEAR(s.x.at(0, 0), 3.0, 1e-4);
  EXPECT_NEAR(s.lambda.at(0, 0), prev.at(0, 0), 1e-4);
  EXPECT_LT(violation_metric(p, s.x), 1e-4);
}

TEST(OuterStep, JacobiResultIndependentOfThreadCount) {
  const FlowProblem p = testing::paper_problem();
  auto run = [&](int threads) {
    AdalState s = AdalState::zero(p);
    AdalConfig c;
    c.threads = threads;
    for (int k = 0; k < 25; ++k) adal_outer_step(s, p, c);
    return s;
  };
  const AdalState base = run(1);
  for (int t : {2, 3, 5, 16}) {
    const AdalState other = run(t);
    EXPECT_EQ(other.x, base.x) << t;
    EXPECT_EQ(other.lambda, base.lambda) << t;
  }
}

TEST(OuterStep, FlowsStayNonnegative) {
  const FlowProblem p = testing::paper_problem();
  AdalState s = AdalState::zero(p);
  AdalConfig c;
  c.threads = 1;
  for (int k = 0; k < 100; ++k) {
    adal_outer_step(s, p, c);
    for (double v : s.x.values()) ASSERT_GE(v, 0.0);
  }
}

TEST(LocalView, ReadsOnlyTwoHopFlowsAndOneHopMultipliers) {
  const FlowProblem p = testing::paper_problem();
  AccessLog log;
  AdalConfig c;
  c.max_iters = 30;
  c.threads = 2;
  solve_adal(p, c, &log);
  const Neighborhoods& nb = p.neighborhoods();
  for (const Access& a : log.entries()) {
    if (a.owner == a.reader) continue;
    if (a.kind == AccessKind::kFlow)
      EXPECT_TRUE(nb.in_two_hop(a.reader, a.owner)) << a.reader << "<-" << a.owner;
    else
      EXPECT_TRUE(nb.in_one_hop(a.reader, a.owner)) << a.reader << "<-" << a.owner;
  }
  const NodeLocalView v = build_local_view(p, 14, p.zero_flow(), p.zero_dual());
  for (int j : v.flow_sources()) EXPECT_TRUE(nb.in_two_hop(14, j));
  for (int j : v.multiplier_sources())
    EXPECT_TRUE(j == 14 || nb.in_one_hop(14, j));
}

TEST(SolveAdal, DiamondSplitsEvenly) {
  const FlowProblem p = testing::diamond_problem(3.0);
  AdalConfig c;
  c.inner_tol = 1e-5;
  c.threads = 1;
  const AdalResult r = solve_adal(p, c);
  ASSERT_EQ(r.trace.status(), SolveStatus::kTolerance);
  const Topology& t = p.topology();
  for (auto [a, b] : {std::pair{0, 1}, {0, 2}, {1, 3}, {2, 3}})
    EXPECT_NEAR(r.flow.at(t.find_arc(a, b), 0), 1.5, 1e-2);
}

TEST(SolveAdal, TraceCarriesArmijoStatistics) {
  const FlowProblem p = testing::grid3_problem(3.0);
  AdalConfig c;
  c.threads = 1;
  c.max_iters = 40;
  c.violation_tol = 0.0;
  const AdalResult r = solve_adal(p, c);
  EXPECT_EQ(r.trace.rows().size(), 40u);
  EXPECT_EQ(r.armijo_records.size(), 40u * 9u);
  EXPECT_EQ(r.armijo.subproblems, 40 * 9);
  long iters = 0;
  for (const ArmijoRecord& rec : r.armijo_records) iters += rec.inner_iters;
  EXPECT_EQ(iters, r.armijo.inner_iterations);
  EXPECT_GE(r.armijo.mean_trials(), 1.0);
  for (size_t k = 1; k < r.trace.rows().size(); ++k)
    EXPECT_GT(r.trace.rows()[k].iter, r.trace.rows()[k - 1].iter);
}

TEST(AdalConfig, Validation) {
  const Neighborhoods nb = testing::paper_problem().neighborhoods();
  auto field_of = [&](const AdalConfig& c) {
    try {
      validate(c, nb);
    } catch (const ValidationError& e) {
      return e.field();
    }
    return std::string("(none)");
  };
  AdalConfig c;
  EXPECT_EQ(field_of(c), "(none)");
  EXPECT_NEAR(resolve_tau(c, nb), 0.9 / 4.0, 1e-15);
  AdalConfig t = c;
  t.tau = 0.25;  // 1 / d_max is excluded
  EXPECT_EQ(field_of(t), "tau");
  AdalConfig r = c;
  r.rho = 0.0;
  EXPECT_EQ(field_of(r), "rho");
  AdalConfig b = c;
  b.armijo.beta = 1.0;
  EXPECT_EQ(field_of(b), "armijo.beta");
  AdalConfig s = c;
  s.armijo.sigma = 0.0;
  EXPECT_EQ(field_of(s), "armijo.sigma");
  EXPECT_EQ(parse_scaling("unscaled"), Scaling::kUnscaled);
  EXPECT_THROW(parse_scaling("diag"), ValidationError);
}

}  // namespace
}  // namespace beamflow
