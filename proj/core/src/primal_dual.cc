#include "beamflow/primal_dual.h"

#include <chrono>
#include <cmath>
#include <numbers>
#include <string>

#include "beamflow/error.h"
#include "beamflow/metrics.h"

namespace beamflow {

void validate(const PrimalDualConfig& config) {
  if (!(config.alpha > 0.0) || !std::isfinite(config.alpha))
    throw ValidationError("alpha", "must be positive");
  if (config.max_iters < 1)
    throw ValidationError("max_iters", "must be at least 1");
  if (!(config.violation_tol >= 0.0))
    throw ValidationError("violation_tol", "must be nonnegative");
}

PrimalDualState PrimalDualState::zero(const FlowProblem& problem) {
  return {problem.zero_flow(), problem.zero_dual(), problem.zero_flow(), 0};
}

namespace {

void primal_step_into(const PrimalDualState& s, const FlowProblem& problem,
                      double alpha, AccessLog* log, FlowState& out) {
  const Topology& topo = problem.topology();
  const int m_count = problem.num_commodities();
  for (int i = 0; i < problem.num_nodes(); ++i) {
    for (int a = topo.first_out(i); a < topo.end_out(i); ++a) {
      const int j = topo.arc(a).head;
      if (log) {
        log->record(i, AccessKind::kFlow, i, a);
        log->record(i, AccessKind::kMultiplier, i);
        log->record(i, AccessKind::kMultiplier, j);
      }
      const double cost =
          std::numbers::ln2 * problem.weight(a) * std::exp2(s.x.arc_total(a));
      for (int m = 0; m < m_count; ++m) {
        const double g = cost + s.p.at(j, m) - s.p.at(i, m);
        out.at(a, m) = std::max(0.0, s.x.at(a, m) - alpha * g);
      }
    }
  }
}

void dual_step_into(const PrimalDualState& s, const FlowProblem& problem,
                    double alpha, AccessLog* log, DualState& out) {
  const Topology& topo = problem.topology();
  const int m_count = problem.num_commodities();
  for (int i = 0; i < problem.num_nodes(); ++i) {
    if (log) log->record(i, AccessKind::kMultiplier, i);
    for (int m = 0; m < m_count; ++m) {
      // inflow - outflow + s_i(m), with s_i(m) = d_i(m).
      double balance = problem.demand(i, m);
      for (int a = topo.first_out(i); a < topo.end_out(i); ++a)
        balance -= s.x.at(a, m);
      for (int a : topo.in_arcs(i)) balance += s.x.at(a, m);
      out.at(i, m) = s.p.at(i, m) + alpha * balance;
    }
    if (log) {
      for (int a = topo.first_out(i); a < topo.end_out(i); ++a)
        log->record(i, AccessKind::kFlow, i, a);
      for (int a : topo.in_arcs(i))
        log->record(i, AccessKind::kFlow, topo.arc(a).tail, a);
    }
  }
}

}  // namespace

FlowState primal_step(const PrimalDualState& state, const FlowProblem& problem,
                      const PrimalDualConfig& config, AccessLog* log) {
  FlowState out = state.x;
  primal_step_into(state, problem, config.alpha, log, out);
  return out;
}

DualState dual_step(const PrimalDualState& state, const FlowProblem& problem,
                    const PrimalDualConfig& config, AccessLog* log) {
  DualState out = state.p;
  dual_step_into(state, problem, config.alpha, log, out);
  return out;
}

void average_update(PrimalDualState& state) {
  const double w = 1.0 / static_cast<double>(state.k);
  auto avg = state.x_avg.values();
  auto x = state.x.values();
  for (size_t n = 0; n < avg.size(); ++n)
    avg[n] = w * x[n] + (1.0 - w) * avg[n];
}

void primal_dual_iteration(PrimalDualState& state, const FlowProblem& problem,
                           const PrimalDualConfig& config, AccessLog* log) {
  FlowState next_x = state.x;
  DualState next_p = state.p;
  primal_step_into(state, problem, config.alpha, log, next_x);
  dual_step_into(state, problem, config.alpha, log, next_p);
  state.x = std::move(next_x);
  state.p = std::move(next_p);
  ++state.k;
  average_update(state);
}

SolveResult solve_pd(const FlowProblem& problem,
                     const PrimalDualConfig& config) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();
  PrimalDualState state = PrimalDualState::zero(problem);
  FlowState next_x = state.x;
  DualState next_p = state.p;
  SolveTrace trace(config.trace_stride);
  SolveStatus status = SolveStatus::kMaxIters;

  for (long k = 1; k <= config.max_iters; ++k) {
    primal_step_into(state, problem, config.alpha, nullptr, next_x);
    dual_step_into(state, problem, config.alpha, nullptr, next_p);
    std::swap(state.x, next_x);
    std::swap(state.p, next_p);
    state.k = k;
    average_update(state);

    TraceRow row;
    row.iter = k;
    row.objective = objective(problem, state.x_avg);
    row.violation = violation_metric(problem, state.x_avg);
    row.iterate_objective = objective(problem, state.x);
    row.iterate_violation = violation_metric(problem, state.x);
    row.elapsed_s = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    if (!std::isfinite(row.objective) || !std::isfinite(row.violation) ||
        !std::isfinite(row.iterate_objective) ||
        !std::isfinite(row.iterate_violation))
      throw DivergedError(k, "primal-dual diverged at iteration " +
                                 std::to_string(k));
    trace.record(row);
    if (row.violation <= config.violation_tol) {
      status = SolveStatus::kTolerance;
      break;
    }
  }
  trace.finish(status);
  return {std::move(state.x_avg), std::move(trace)};
}

}  // namespace beamflow
