#include "beamflow/harness.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <nlohmann/json.hpp>
#include <numbers>
#include <sstream>

#include "beamflow/error.h"
#include "beamflow/io.h"

namespace beamflow {

double violation_metric(const FlowProblem& problem, const FlowState& flow) {
  double total = 0.0;
  for (double r : conservation_residual(problem, flow)) total += std::abs(r);
  return total;
}

namespace {

constexpr double kLn2 = std::numbers::ln2;

// Every simple path source -> sink as an arc list.
std::vector<std::vector<int>> simple_paths(const Topology& topo, int source,
                                           int sink, long max_paths) {
  std::vector<std::vector<int>> out;
  std::vector<int> arcs;
  std::vector<char> on_path(topo.num_nodes(), 0);
  std::function<void(int)> dfs = [&](int v) {
    if (v == sink) {
      if (static_cast<long>(out.size()) >= max_paths)
        throw OracleTooLargeError("oracle: more than " +
                                  std::to_string(max_paths) +
                                  " simple paths for one commodity");
      out.push_back(arcs);
      return;
    }
    on_path[v] = 1;
    for (int a = topo.first_out(v); a < topo.end_out(v); ++a) {
      const int w = topo.arc(a).head;
      if (on_path[w]) continue;
      arcs.push_back(a);
      dfs(w);
      arcs.pop_back();
    }
    on_path[v] = 0;
  };
  dfs(source);
  return out;
}

}  // namespace

OracleResult oracle_solve_small(const FlowProblem& problem, long max_paths) {
  const Topology& topo = problem.topology();
  const int m_count = problem.num_commodities();
  std::vector<std::vector<std::vector<int>>> path_arcs(m_count);
  OracleResult result;
  result.path_flows.resize(m_count);
  for (int m = 0; m < m_count; ++m) {
    const Commodity& c = problem.commodities()[m];
    path_arcs[m] = simple_paths(topo, c.source, c.sink, max_paths);
    if (path_arcs[m].empty())
      throw NoRouteError({m}, "oracle: commodity " + std::to_string(m) +
                                  " has no path");
    const double share = c.rate / static_cast<double>(path_arcs[m].size());
    result.path_flows[m].assign(path_arcs[m].size(), share);
  }

  std::vector<double> y(problem.num_arcs(), 0.0);
  auto rebuild_loads = [&] {
    std::fill(y.begin(), y.end(), 0.0);
    for (int m = 0; m < m_count; ++m)
      for (size_t p = 0; p < path_arcs[m].size(); ++p)
        for (int a : path_arcs[m][p]) y[a] += result.path_flows[m][p];
  };
  auto total_cost = [&] {
    double f = 0.0;
    for (int a = 0; a < problem.num_arcs(); ++a)
      f += problem.weight(a) * std::exp2(y[a]);
    return f;
  };
  auto path_length = [&](const std::vector<int>& arcs, double shift) {
    double d = 0.0;
    for (int a : arcs) d += kLn2 * problem.weight(a) * std::exp2(y[a] + shift);
    return d;
  };
  auto gap_bound = [&] {
    double gap = 0.0;
    for (int m = 0; m < m_count; ++m) {
      std::vector<double> lengths;
      for (const auto& p : path_arcs[m]) lengths.push_back(path_length(p, 0.0));
      const double best = *std::min_element(lengths.begin(), lengths.end());
      for (size_t p = 0; p < lengths.size(); ++p)
        gap += result.path_flows[m][p] * (lengths[p] - best);
    }
    return gap;
  };

  rebuild_loads();
  double f = total_cost();
  constexpr long kMaxSweeps = 2000000;
  constexpr int kMaxIdleSweeps = 64;
  int idle = 0;
  for (long sweep = 1; sweep <= kMaxSweeps; ++sweep) {
    for (int m = 0; m < m_count; ++m) {
      auto& h = result.path_flows[m];
      // Move flow off the path with the largest share of the gap bound,
      // h_p (D_p - D_min), onto the cheapest path.
      std::vector<double> d(h.size());
      int lo = 0;
      for (size_t p = 0; p < h.size(); ++p) {
        d[p] = path_length(path_arcs[m][p], 0.0);
        if (d[p] < d[lo]) lo = static_cast<int>(p);
      }
      int hi = -1;
      double worst = 0.0;
      for (size_t p = 0; p < h.size(); ++p) {
        const double share = h[p] * (d[p] - d[lo]);
        if (share > worst) worst = share, hi = static_cast<int>(p);
      }
      if (hi < 0 || hi == lo) continue;

      // Arcs on exactly one of the two paths; shared arcs cancel.
      std::vector<int> only_hi, only_lo;
      for (int a : path_arcs[m][hi])
        if (std::find(path_arcs[m][lo].begin(), path_arcs[m][lo].end(), a) ==
            path_arcs[m][lo].end())
          only_hi.push_back(a);
      for (int a : path_arcs[m][lo])
        if (std::find(path_arcs[m][hi].begin(), path_arcs[m][hi].end(), a) ==
            path_arcs[m][hi].end())
          only_lo.push_back(a);
      // d/d delta of the objective when moving delta from hi to lo.
      auto slope = [&](double delta) {
        return path_length(only_lo, delta) - path_length(only_hi, -delta);
      };
      double delta = h[hi];
      if (slope(delta) > 0.0) {
        double left = 0.0, right = h[hi];
        for (int it = 0; it < 200 && right - left > 0.0; ++it) {
          const double mid = 0.5 * (left + right);
          if (mid <= left || mid >= right) break;
          (slope(mid) > 0.0 ? right : left) = mid;
        }
        delta = 0.5 * (left + right);
      }
      h[hi] -= delta;
      h[lo] += delta;
      for (int a : path_arcs[m][hi]) y[a] -= delta;
      for (int a : path_arcs[m][lo]) y[a] += delta;
    }
    // Periodic exact rebuild keeps incremental load updates from drifting.
    if (sweep % 256 == 0) rebuild_loads();
    const double f_new = total_cost();
    result.sweeps = sweep;
    const double gap = gap_bound();
    idle = f_new < f ? 0 : idle + 1;
    f = std::min(f, f_new);
    if (gap <= 1e-10 * std::max(1.0, f) || idle >= kMaxIdleSweeps) break;
  }

  rebuild_loads();
  result.flow = problem.zero_flow();
  result.paths.resize(m_count);
  for (int m = 0; m < m_count; ++m) {
    for (size_t p = 0; p < path_arcs[m].size(); ++p) {
      std::vector<int> nodes{problem.commodities()[m].source};
      for (int a : path_arcs[m][p]) {
        nodes.push_back(topo.arc(a).head);
        result.flow.at(a, m) += result.path_flows[m][p];
      }
      result.paths[m].push_back(std::move(nodes));
    }
  }
  result.objective = objective(problem, result.flow);
  result.gap = gap_bound();
  return result;
}

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::kPrimalDual:
      return "pd";
    case SolverKind::kAdal:
      return "adal";
    case SolverKind::kOspf:
      return "ospf";
  }
  return "unknown";
}

SolverKind parse_solver(std::string_view name) {
  if (name == "pd") return SolverKind::kPrimalDual;
  if (name == "adal") return SolverKind::kAdal;
  if (name == "ospf") return SolverKind::kOspf;
  throw ValidationError("solver", "unknown solver '" + std::string(name) +
                                      "' (expected pd, adal or ospf)");
}

const SolverSummary* ComparisonReport::find(SolverKind kind) const {
  for (const SolverSummary& s : solvers)
    if (s.kind == kind) return &s;
  return nullptr;
}

SolverSummary summarize(const FlowProblem& problem, SolverKind kind,
                        FlowState flow, SolveTrace trace) {
  SolverSummary s;
  s.kind = kind;
  s.final_objective = objective(problem, flow);
  s.final_violation = violation_metric(problem, flow);
  s.iterations = trace.iterations();
  s.status = trace.status();
  for (int t = 0; t < 3; ++t) {
    s.iters_to_violation[t] =
        trace.first_below(SolveTrace::kDefaultMilestones[t]);
    s.iterate_iters_to_violation[t] =
        trace.first_iterate_below(SolveTrace::kDefaultMilestones[t]);
  }
  s.powers = recover_powers(problem, flow);
  s.total_intra_power_w = s.powers.total_intra_power_w();
  s.station_received_power_w = s.powers.station_received_power_w();
  s.station_rate_bps = station_rate(problem, s.powers);
  s.power_feasible = s.powers.feasible();
  s.flow = std::move(flow);
  s.trace = std::move(trace);
  return s;
}

SolverSummary run_solver(const FlowProblem& problem, SolverKind kind,
                         const CompareConfig& config) {
  switch (kind) {
    case SolverKind::kPrimalDual: {
      SolveResult r = solve_pd(problem, config.pd);
      return summarize(problem, kind, std::move(r.flow), std::move(r.trace));
    }
    case SolverKind::kAdal: {
      AdalResult r = solve_adal(problem, config.adal);
      SolverSummary s =
          summarize(problem, kind, std::move(r.flow), std::move(r.trace));
      s.armijo = std::move(r.armijo);
      s.armijo_records = std::move(r.armijo_records);
      return s;
    }
    case SolverKind::kOspf: {
      RouteResult r = route_ospf(problem, config.metric);
      SolveTrace trace;
      TraceRow row;
      row.objective = row.iterate_objective = objective(problem, r.flow);
      row.violation = row.iterate_violation = violation_metric(problem, r.flow);
      trace.record(row);
      trace.finish(SolveStatus::kTolerance);
      SolverSummary s =
          summarize(problem, kind, std::move(r.flow), std::move(trace));
      s.routes = std::move(r.paths);
      return s;
    }
  }
  throw Error("unknown solver");
}

namespace {

// Re-raises the active exception with the solver name prefixed, keeping its
// type so callers can still map it to an exit status.
[[noreturn]] void rethrow_tagged(SolverKind kind) {
  const std::string tag = std::string(to_string(kind)) + ": ";
  try {
    throw;
  } catch (const NoRouteError& e) {
    throw NoRouteError(e.commodities(), tag + e.what());
  } catch (const DivergedError& e) {
    throw DivergedError(e.iteration(), tag + e.what());
  } catch (const LineSearchError& e) {
    throw LineSearchError(e.node(), tag + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(e.field(), tag + e.what());
  } catch (const std::exception& e) {
    throw Error(tag + e.what());
  }
}

}  // namespace

ComparisonReport compare_solvers(const FlowProblem& problem,
                                 const CompareConfig& config) {
  if (config.solvers.empty())
    throw ValidationError("solvers", "at least one solver is required");
  ComparisonReport report;
  auto guarded = [&](SolverKind kind) {
    try {
      return run_solver(problem, kind, config);
    } catch (...) {
      rethrow_tagged(kind);
    }
  };
  if (config.concurrent) {
    std::vector<std::future<SolverSummary>> jobs;
    for (SolverKind kind : config.solvers)
      jobs.push_back(std::async(std::launch::async, guarded, kind));
    for (auto& job : jobs) report.solvers.push_back(job.get());
  } else {
    for (SolverKind kind : config.solvers)
      report.solvers.push_back(guarded(kind));
  }

  if (config.use_oracle) {
    try {
      report.reference_objective = oracle_solve_small(problem).objective;
      report.reference_source = "oracle";
    } catch (const OracleTooLargeError&) {
    }
  }
  if (report.reference_source.empty()) {
    double best = std::numeric_limits<double>::infinity();
    for (const SolverSummary& s : report.solvers)
      if (s.kind != SolverKind::kOspf) best = std::min(best, s.final_objective);
    if (!std::isfinite(best))
      for (const SolverSummary& s : report.solvers)
        best = std::min(best, s.final_objective);
    report.reference_objective = best;
    report.reference_source = "best_solver";
  }
  return report;
}

std::string report_to_json(const ComparisonReport& report) {
  using nlohmann::json;
  json doc;
  doc["reference_objective"] = report.reference_objective;
  doc["reference_source"] = report.reference_source;
  json solvers = json::array();
  for (const SolverSummary& s : report.solvers) {
    json j;
    j["solver"] = std::string(to_string(s.kind));
    j["status"] = std::string(to_string(s.status));
    j["iterations"] = s.iterations;
    j["final_objective"] = s.final_objective;
    j["objective_error"] =
        std::abs(s.final_objective - report.reference_objective);
    j["final_violation"] = s.final_violation;
    const char* names[] = {"1e-1", "1e-2", "1e-3"};
    auto milestones = [&](const std::optional<long>(&reached)[3]) {
      json m;
      for (int t = 0; t < 3; ++t)
        m[names[t]] = reached[t] ? json(*reached[t]) : json(nullptr);
      return m;
    };
    j["iters_to_violation"] = milestones(s.iters_to_violation);
    if (s.kind == SolverKind::kPrimalDual)
      j["iterate_iters_to_violation"] =
          milestones(s.iterate_iters_to_violation);
    j["total_intra_power_w"] = s.total_intra_power_w;
    j["station_received_power_w"] = s.station_received_power_w;
    j["station_rate_bps"] = s.station_rate_bps;
    j["power_feasible"] = s.power_feasible;
    if (s.armijo) {
      j["armijo"] = {{"mean_trials", s.armijo->mean_trials()},
                     {"mean_step", s.armijo->mean_step()},
                     {"mean_inner_iters", s.armijo->mean_inner_iters()},
                     {"inner_iterations", s.armijo->inner_iterations}};
    }
    if (!s.routes.empty()) j["routes"] = s.routes;
    solvers.push_back(std::move(j));
  }
  doc["solvers"] = std::move(solvers);
  return doc.dump(2) + "\n";
}

void write_comparison(const ComparisonReport& report,
                      const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "report.json", report_to_json(report));
  for (const SolverSummary& s : report.solvers) {
    const std::string name(to_string(s.kind));
    std::ostringstream trace;
    const TraceKind kind = s.kind == SolverKind::kPrimalDual ? TraceKind::kPrimalDual
                           : s.kind == SolverKind::kAdal     ? TraceKind::kAdal
                                                             : TraceKind::kSingleShot;
    write_trace_csv(trace, s.trace, kind, &report.reference_objective);
    write_file(dir / ("trace_" + name + ".csv"), trace.str());
    std::ostringstream powers;
    write_power_csv(powers, s.powers);
    write_file(dir / ("powers_" + name + ".csv"), powers.str());
    if (s.armijo) {
      std::ostringstream records, hist;
      write_armijo_csv(records, s.armijo_records);
      write_file(dir / ("armijo_" + name + ".csv"), records.str());
      write_armijo_histogram_csv(hist, "adal", *s.armijo);
      write_file(dir / "armijo_hist.csv", hist.str());
    }
  }
}

Preset paper_preset() {
  Preset p;
  GridParams gp;
  gp.spacing_m = kPaperSpacingM;
  p.scenario = grid_scenario(gp);
  p.commodities = {{0, 35, 9.0}, {5, 30, 9.0}};
  CompareConfig& c = p.config;
  c.solvers = {SolverKind::kPrimalDual, SolverKind::kAdal, SolverKind::kOspf};
  c.pd.max_iters = 500000;
  c.pd.violation_tol = 1e-2;
  c.pd.trace_stride = 100;
  c.adal.inner_tol = 1e-3;
  c.adal.violation_tol = 1e-2;
  c.use_oracle = false;
  return p;
}

}  // namespace beamflow
