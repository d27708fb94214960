#ifndef BEAMFLOW_HARNESS_H_
#define BEAMFLOW_HARNESS_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "beamflow/adal.h"
#include "beamflow/metrics.h"
#include "beamflow/ospf.h"
#include "beamflow/primal_dual.h"
#include "beamflow/problem.h"
#include "beamflow/trace.h"

namespace beamflow {

// Reference solver for small instances: optimizes over simple-path flows.
struct OracleResult {
  FlowState flow;
  double objective = 0.0;
  // Upper bound on objective - optimum from first-order optimality:
  //   sum_m sum_p h_p (D_p - min_q D_q),  D_p = path derivative length.
  double gap = 0.0;
  long sweeps = 0;
  std::vector<std::vector<std::vector<int>>> paths;  // [m][p] = node list
  std::vector<std::vector<double>> path_flows;       // [m][p]
};

// Enumerates every simple path of each commodity (throws
// OracleTooLargeError beyond `max_paths` per commodity), then shifts flow
// from the costliest used path to the cheapest one with an exact 1-D line
// search until the gap bound is below 1e-10 * max(1, objective).
OracleResult oracle_solve_small(const FlowProblem& problem,
                                long max_paths = 10000);

enum class SolverKind { kPrimalDual, kAdal, kOspf };

std::string_view to_string(SolverKind kind);
SolverKind parse_solver(std::string_view name);  // "pd", "adal", "ospf"

struct CompareConfig {
  std::vector<SolverKind> solvers;
  PrimalDualConfig pd;
  AdalConfig adal;
  RouteMetric metric = RouteMetric::kDistance;
  // Try oracle_solve_small for the reference objective.
  bool use_oracle = true;
  // Run the solvers concurrently.
  bool concurrent = true;
};

struct SolverSummary {
  SolverKind kind = SolverKind::kOspf;
  double final_objective = 0.0;
  double final_violation = 0.0;
  long iterations = 0;
  SolveStatus status = SolveStatus::kTolerance;
  // Iterations to reach violation 1e-1, 1e-2, 1e-3 (unset: never reached).
  std::optional<long> iters_to_violation[3];
  // Same milestones for the raw iterate (differs from the above for pd only).
  std::optional<long> iterate_iters_to_violation[3];
  double total_intra_power_w = 0.0;
  double station_received_power_w = 0.0;
  double station_rate_bps = 0.0;
  bool power_feasible = true;

  FlowState flow;
  PowerReport powers;
  SolveTrace trace;
  std::optional<ArmijoTotals> armijo;
  std::vector<ArmijoRecord> armijo_records;
  std::vector<std::vector<int>> routes;
};

struct ComparisonReport {
  std::vector<SolverSummary> solvers;
  double reference_objective = 0.0;
  std::string reference_source;  // "oracle" or "best_solver"

  const SolverSummary* find(SolverKind kind) const;
};

// Fills every SolverSummary field from a finished solve.
SolverSummary summarize(const FlowProblem& problem, SolverKind kind,
                        FlowState flow, SolveTrace trace);

SolverSummary run_solver(const FlowProblem& problem, SolverKind kind,
                         const CompareConfig& config);

// Runs every requested solver on the same problem. Solver errors propagate
// prefixed with the solver name.
ComparisonReport compare_solvers(const FlowProblem& problem,
                                 const CompareConfig& config);

// Writes report.json, trace_<solver>.csv, powers_<solver>.csv and, for
// ADAL, armijo_adal.csv and armijo_hist.csv into `dir`.
void write_comparison(const ComparisonReport& report,
                      const std::filesystem::path& dir);

std::string report_to_json(const ComparisonReport& report);

// The 6x6 reproduction run: 36 nodes on a zero-jitter grid, commodities
// 0 -> 35 and 5 -> 30 at 9 bits/s/Hz, P_max 100 W, 1 GHz carrier, 5 MHz
// bandwidth, inner tolerance 1e-3. Both iterative solvers stop at violation
// 1e-2; ADAL stalls near 5e-3 with this inner tolerance.
struct Preset {
  NetworkScenario scenario;
  CommoditySet commodities;
  CompareConfig config;
};

inline constexpr double kPaperSpacingM = 44300.0;

Preset paper_preset();

}  // namespace beamflow

#endif  // BEAMFLOW_HARNESS_H_
