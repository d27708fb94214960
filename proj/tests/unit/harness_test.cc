#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <random>

#include "beamflow/error.h"
#include "beamflow/harness.h"
#include "beamflow/io.h"
#include "oracles.h"

namespace beamflow {
namespace {

TEST(ViolationMetric, ZeroFlowAndRoutedFlow) {
  const FlowProblem p = testing::two_node_problem(2.5);
  EXPECT_EQ(violation_metric(p, p.zero_flow()), 5.0);
  const FlowProblem g = testing::paper_problem();
  EXPECT_EQ(violation_metric(g, route_ospf(g).flow), 0.0);
}

TEST(ViolationMetric, MatchesNaiveDoubleLoop) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const FlowProblem p = testing::random_problem(rng, 6, 3);
    const FlowState x = testing::random_flow(rng, p, 3.0);
    double naive = 0.0;
    for (int m = 0; m < p.num_commodities(); ++m)
      for (int i = 0; i < p.num_nodes(); ++i) {
        double in = 0.0, out = 0.0;
        for (int a = 0; a < p.num_arcs(); ++a) {
          if (p.topology().arc(a).head == i) in += x.at(a, m);
          if (p.topology().arc(a).tail == i) out += x.at(a, m);
        }
        naive += std::abs(in - out + p.demand(i, m));
      }
    EXPECT_NEAR(violation_metric(p, x), naive, 1e-12 * naive);
  }
}

TEST(Oracle, TwoNodeSinglePath) {
  const FlowProblem p = testing::two_node_problem(2.0);
  const OracleResult r = oracle_solve_small(p);
  EXPECT_EQ(r.paths.size(), 1u);
  EXPECT_EQ(r.paths[0], (std::vector<std::vector<int>>{{0, 1}}));
  EXPECT_NEAR(r.flow.at(0, 0), 2.0, 1e-12);
  EXPECT_NEAR(r.objective, p.weight(0) * 4.0, 1e-12);
}

TEST(Oracle, DiamondEqualSplit) {
  const double rate = 3.0;
  const FlowProblem p = testing::diamond_problem(rate);
  for (int a = 0; a < p.num_arcs(); ++a) ASSERT_NEAR(p.weight(a), 2.0, 1e-12);
  const OracleResult r = oracle_solve_small(p);
  EXPECT_NEAR(r.objective, 4.0 * 2.0 * std::pow(2.0, rate / 2.0), 1e-9);
  for (int a = 0; a < p.num_arcs(); ++a)
    EXPECT_NEAR(r.flow.at(a, 0), rate / 2.0, 1e-6);
  EXPECT_EQ(violation_metric(p, r.flow), 0.0);
}

TEST(Oracle, Grid3AgreesWithBruteForceGridSearch) {
  // With one commodity and symmetric geometry the optimum can be checked
  // against a coarse search over random path mixtures: none may beat it.
  const FlowProblem p = testing::grid3_problem(3.0);
  const OracleResult r = oracle_solve_small(p);
  EXPECT_LE(r.gap, 1e-10 * r.objective);
  EXPECT_LT(violation_metric(p, r.flow), 1e-12);
  std::mt19937_64 rng(42);
  const auto& paths = r.paths[0];
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> h(paths.size());
    double sum = 0.0;
    for (double& v : h) sum += (v = std::pow(u(rng), 4));
    FlowState x = p.zero_flow();
    for (size_t q = 0; q < paths.size(); ++q)
      for (size_t k = 0; k + 1 < paths[q].size(); ++k)
        x.at(p.topology().find_arc(paths[q][k], paths[q][k + 1]), 0) +=
            3.0 * h[q] / sum;
    EXPECT_GE(objective(p, x), r.objective - 1e-9);
  }
}

TEST(Oracle, GuardsAgainstLargeInstances) {
  EXPECT_THROW(oracle_solve_small(testing::paper_problem(), 1000),
               OracleTooLargeError);
}

TEST(Harness, ParseSolverNames) {
  EXPECT_EQ(parse_solver("pd"), SolverKind::kPrimalDual);
  EXPECT_EQ(parse_solver("adal"), SolverKind::kAdal);
  EXPECT_EQ(parse_solver("ospf"), SolverKind::kOspf);
  EXPECT_THROW(parse_solver("admm"), ValidationError);
}

CompareConfig small_config() {
  CompareConfig c;
  c.solvers = {SolverKind::kPrimalDual, SolverKind::kAdal, SolverKind::kOspf};
  c.pd.alpha = 0.1;
  c.pd.max_iters = 500000;
  c.adal.inner_tol = 1e-5;
  c.adal.threads = 1;
  return c;
}

TEST(CompareSolvers, ReportIsConsistent) {
  const FlowProblem p = testing::grid3_problem(3.0);
  const ComparisonReport r = compare_solvers(p, small_config());
  ASSERT_EQ(r.solvers.size(), 3u);
  EXPECT_EQ(r.reference_source, "oracle");
  const OracleResult oracle = oracle_solve_small(p);
  EXPECT_DOUBLE_EQ(r.reference_objective, oracle.objective);
  for (const SolverSummary& s : r.solvers) {
    EXPECT_NEAR(s.station_rate_bps, station_rate(p, s.powers),
                1e-9 * s.station_rate_bps);
    EXPECT_GE(s.total_intra_power_w, 0.0);
    EXPECT_GE(s.station_received_power_w, 0.0);
    EXPECT_NEAR(s.final_objective, objective(p, s.flow), 1e-12);
    EXPECT_GE(s.final_objective,
              testing::objective_lower_bound(p, oracle, s.final_violation) -
                  1e-9);
    for (size_t i = 0; i < s.powers.nodes.size(); ++i)
      if (s.powers.nodes[i].feasible)
        EXPECT_EQ(s.powers.nodes[i].station_power_w,
                  100.0 - s.powers.nodes[i].intra_power_w);
    if (s.kind != SolverKind::kOspf) {
      EXPECT_EQ(s.status, SolveStatus::kTolerance);
      EXPECT_LE(s.final_violation, 1e-3);
      ASSERT_TRUE(s.iters_to_violation[2].has_value());
      EXPECT_EQ(*s.iters_to_violation[2], s.iterations);
    }
  }
  EXPECT_TRUE(r.find(SolverKind::kAdal)->armijo.has_value());
  EXPECT_EQ(r.find(SolverKind::kOspf)->routes.size(), 1u);
}

TEST(CompareSolvers, SequentialAndConcurrentAgree) {
  const FlowProblem p = testing::diamond_problem(3.0);
  CompareConfig c = small_config();
  const ComparisonReport a = compare_solvers(p, c);
  c.concurrent = false;
  const ComparisonReport b = compare_solvers(p, c);
  EXPECT_EQ(report_to_json(a), report_to_json(b));
}

TEST(CompareSolvers, FallsBackToBestSolver) {
  const FlowProblem p = testing::grid3_problem(3.0);
  CompareConfig c = small_config();
  c.use_oracle = false;
  c.solvers = {SolverKind::kAdal, SolverKind::kOspf};
  const ComparisonReport r = compare_solvers(p, c);
  EXPECT_EQ(r.reference_source, "best_solver");
  EXPECT_EQ(r.reference_objective, r.find(SolverKind::kAdal)->final_objective);
}

TEST(CompareSolvers, TagsErrorsWithSolverName) {
  NetworkScenario s;
  s.nodes = {{0, {0, 0}}, {1, {1, 0}}};
  s.station = {0, 1};
  s.arcs = {{1, 0}};
  const FlowProblem p = build_problem(s, {{0, 1, 1.0}});
  CompareConfig c;
  c.solvers = {SolverKind::kOspf};
  try {
    compare_solvers(p, c);
    FAIL() << "expected no-route";
  } catch (const NoRouteError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("ospf: ", 0), 0u);
    EXPECT_EQ(e.commodities(), std::vector<int>{0});
  }
}

TEST(WriteComparison, WritesEveryArtifact) {
  const FlowProblem p = testing::diamond_problem(3.0);
  const ComparisonReport r = compare_solvers(p, small_config());
  const auto dir = std::filesystem::temp_directory_path() / "beamflow_cmp_test";
  std::filesystem::remove_all(dir);
  write_comparison(r, dir);
  for (const char* f :
       {"report.json", "trace_pd.csv", "trace_adal.csv", "trace_ospf.csv",
        "powers_pd.csv", "powers_adal.csv", "powers_ospf.csv",
        "armijo_adal.csv", "armijo_hist.csv"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  const auto doc = nlohmann::json::parse(read_file(dir / "report.json"));
  EXPECT_EQ(doc["reference_source"], "oracle");
  EXPECT_EQ(doc["solvers"].size(), 3u);
  EXPECT_TRUE(doc["solvers"][0].contains("iterate_iters_to_violation"));
  const std::string trace = read_file(dir / "trace_pd.csv");
  EXPECT_EQ(trace.substr(0, trace.find('\n')),
            "iter,objective,objective_error,violation,iterate_objective,"
            "iterate_violation");
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace beamflow
