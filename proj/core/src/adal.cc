#include "beamflow/adal.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <string>

#include "beamflow/error.h"
#include "beamflow/metrics.h"
#include "beamflow/parallel.h"

namespace beamflow {

namespace {

constexpr double kLn2 = std::numbers::ln2;

void sort_unique(std::vector<int>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// y_a = sum_m x_am for each local arc.
void arc_totals(std::span<const double> x, int m_count,
                std::vector<double>& y) {
  const size_t arcs = m_count == 0 ? 0 : x.size() / m_count;
  y.assign(arcs, 0.0);
  for (size_t a = 0; a < arcs; ++a)
    for (int m = 0; m < m_count; ++m) y[a] += x[a * m_count + m];
}

double projected_gradient_norm(std::span<const double> x,
                               std::span<const double> g) {
  double sq = 0.0;
  for (size_t k = 0; k < x.size(); ++k) {
    const double d = std::max(0.0, x[k] - g[k]) - x[k];
    sq += d * d;
  }
  return std::sqrt(sq);
}

}  // namespace

std::string_view to_string(Scaling scaling) {
  switch (scaling) {
    case Scaling::kPaperDiagonal:
      return "paper_diagonal";
    case Scaling::kFullDiagonal:
      return "full_diagonal";
    case Scaling::kUnscaled:
      return "unscaled";
  }
  return "unknown";
}

Scaling parse_scaling(std::string_view name) {
  if (name == "paper_diagonal") return Scaling::kPaperDiagonal;
  if (name == "full_diagonal") return Scaling::kFullDiagonal;
  if (name == "unscaled") return Scaling::kUnscaled;
  throw ValidationError("scaling", "unknown mode '" + std::string(name) + "'");
}

double resolve_tau(const AdalConfig& config, const Neighborhoods& nb) {
  if (config.tau) return *config.tau;
  return 0.9 / std::max(1, nb.max_degree);
}

void validate(const AdalConfig& config, const Neighborhoods& nb) {
  if (!(config.rho > 0.0) || !std::isfinite(config.rho))
    throw ValidationError("rho", "must be positive");
  const double tau = resolve_tau(config, nb);
  const double bound = 1.0 / std::max(1, nb.max_degree);
  if (!(tau > 0.0) || !(tau < bound))
    throw ValidationError("tau", "must lie in (0, 1/d_max) = (0, " +
                                     std::to_string(bound) + ")");
  if (!(config.inner_tol > 0.0))
    throw ValidationError("inner_tol", "must be positive");
  if (config.inner_max_iters < 1)
    throw ValidationError("inner_max_iters", "must be at least 1");
  if (!(config.armijo.initial_step > 0.0))
    throw ValidationError("armijo.s", "must be positive");
  if (!(config.armijo.beta > 0.0 && config.armijo.beta < 1.0))
    throw ValidationError("armijo.beta", "must lie in (0, 1)");
  if (!(config.armijo.sigma > 0.0 && config.armijo.sigma < 1.0))
    throw ValidationError("armijo.sigma", "must lie in (0, 1)");
  if (config.armijo.max_trials < 1)
    throw ValidationError("armijo.max_trials", "must be at least 1");
  if (config.max_iters < 1)
    throw ValidationError("max_iters", "must be at least 1");
  if (!(config.violation_tol >= 0.0))
    throw ValidationError("violation_tol", "must be nonnegative");
}

NodeLocalView build_local_view(const FlowProblem& problem, int node,
                               const FlowState& x, const DualState& lambda,
                               AccessLog* log) {
  const Topology& topo = problem.topology();
  const int m_count = problem.num_commodities();
  NodeLocalView v;
  v.node_ = node;
  v.m_ = m_count;

  auto read_flow = [&](int arc, int m) {
    if (log && m == 0)
      log->record(node, AccessKind::kFlow, topo.arc(arc).tail, arc);
    return x.at(arc, m);
  };
  auto read_lambda = [&](int owner, int m) {
    if (log && m == 0) log->record(node, AccessKind::kMultiplier, owner);
    return lambda.at(owner, m);
  };

  for (int a = topo.first_out(node); a < topo.end_out(node); ++a) {
    v.arc_ids_.push_back(a);
    v.heads_.push_back(topo.arc(a).head);
    v.weights_.push_back(problem.weight(a));
    for (int m = 0; m < m_count; ++m) v.own_flows_.push_back(read_flow(a, m));
  }

  v.multiplier_sources_.push_back(node);
  for (int m = 0; m < m_count; ++m) v.own_lambda_.push_back(read_lambda(node, m));
  for (int l : v.heads_) {
    v.multiplier_sources_.push_back(l);
    for (int m = 0; m < m_count; ++m) v.head_lambda_.push_back(read_lambda(l, m));
  }
  sort_unique(v.multiplier_sources_);

  v.own_base_.assign(m_count, 0.0);
  for (int m = 0; m < m_count; ++m) v.own_base_[m] = -problem.demand(node, m);
  for (int b : topo.in_arcs(node)) {
    v.flow_sources_.push_back(topo.arc(b).tail);
    for (int m = 0; m < m_count; ++m) v.own_base_[m] -= read_flow(b, m);
  }

  v.head_base_.assign(v.heads_.size() * m_count, 0.0);
  for (size_t a = 0; a < v.heads_.size(); ++a) {
    const int l = v.heads_[a];
    double* row = &v.head_base_[a * m_count];
    for (int m = 0; m < m_count; ++m) row[m] = -problem.demand(l, m);
    for (int b = topo.first_out(l); b < topo.end_out(l); ++b) {
      v.flow_sources_.push_back(l);
      for (int m = 0; m < m_count; ++m) row[m] += read_flow(b, m);
    }
    for (int b : topo.in_arcs(l)) {
      const int tail = topo.arc(b).tail;
      if (tail == node) continue;
      v.flow_sources_.push_back(tail);
      for (int m = 0; m < m_count; ++m) row[m] -= read_flow(b, m);
    }
  }
  std::erase(v.flow_sources_, node);
  sort_unique(v.flow_sources_);
  return v;
}

double local_al_value(const NodeLocalView& view,
                      std::span<const double> c, double rho) {
  const int m_count = view.num_commodities();
  const int arcs = view.num_local_arcs();
  double value = 0.0;
  for (int a = 0; a < arcs; ++a) {
    double y = 0.0;
    for (int m = 0; m < m_count; ++m) y += c[a * m_count + m];
    value += view.weights()[a] * std::exp2(y);
  }
  double penalty = 0.0;
  for (int m = 0; m < m_count; ++m) {
    double r_own = view.own_base(m);
    for (int a = 0; a < arcs; ++a) {
      const double x = c[a * m_count + m];
      r_own += x;
      const double r_head = view.head_base(a, m) - x;
      penalty += r_head * r_head;
      value += x * (view.own_multiplier(m) - view.head_multiplier(a, m));
    }
    penalty += r_own * r_own;
  }
  return value + 0.5 * rho * penalty;
}

void local_al_gradient(const NodeLocalView& view, std::span<const double> c,
                       double rho, std::span<double> out) {
  const int m_count = view.num_commodities();
  const int arcs = view.num_local_arcs();
  for (int m = 0; m < m_count; ++m) {
    double r_own = view.own_base(m);
    for (int a = 0; a < arcs; ++a) r_own += c[a * m_count + m];
    for (int a = 0; a < arcs; ++a) {
      const double r_head = view.head_base(a, m) - c[a * m_count + m];
      out[a * m_count + m] =
          view.own_multiplier(m) - view.head_multiplier(a, m) +
          rho * (r_own - r_head);
    }
  }
  for (int a = 0; a < arcs; ++a) {
    double y = 0.0;
    for (int m = 0; m < m_count; ++m) y += c[a * m_count + m];
    const double cost = kLn2 * view.weights()[a] * std::exp2(y);
    for (int m = 0; m < m_count; ++m) out[a * m_count + m] += cost;
  }
}

std::vector<double> local_al_gradient(const NodeLocalView& view,
                                      std::span<const double> candidate,
                                      double rho) {
  std::vector<double> g(view.num_vars());
  local_al_gradient(view, candidate, rho, g);
  return g;
}

std::vector<double> local_al_hessian_diag(const NodeLocalView& view,
                                          std::span<const double> candidate,
                                          double rho, Scaling mode) {
  if (mode == Scaling::kUnscaled)
    throw DomainError("local_al_hessian_diag: unscaled mode has no diagonal");
  const int m_count = view.num_commodities();
  std::vector<double> diag(view.num_vars(), 2.0 * rho);
  if (mode == Scaling::kFullDiagonal) {
    std::vector<double> y;
    arc_totals(candidate, m_count, y);
    for (int a = 0; a < view.num_local_arcs(); ++a) {
      const double curv = kLn2 * kLn2 * view.weights()[a] * std::exp2(y[a]);
      for (int m = 0; m < m_count; ++m) diag[a * m_count + m] += curv;
    }
  }
  return diag;
}

std::vector<double> scaled_direction(std::span<const double> gradient,
                                     std::span<const double> diag,
                                     Scaling mode) {
  std::vector<double> dir(gradient.size());
  if (mode == Scaling::kUnscaled) {
    for (size_t k = 0; k < gradient.size(); ++k) dir[k] = -gradient[k];
    return dir;
  }
  for (size_t k = 0; k < gradient.size(); ++k) {
    if (!(diag[k] > 0.0))
      throw DomainError("scaled_direction: diagonal entry " +
                        std::to_string(k) + " is not positive");
    dir[k] = -gradient[k] / diag[k];
  }
  return dir;
}

double InnerStats::mean_step() const {
  if (steps.empty()) return 0.0;
  double s = 0.0;
  for (double v : steps) s += v;
  return s / static_cast<double>(steps.size());
}

double InnerStats::mean_trials() const {
  if (trials.empty()) return 0.0;
  double s = 0.0;
  for (int v : trials) s += v;
  return s / static_cast<double>(trials.size());
}

InnerResult armijo_inner_solve(const NodeLocalView& view,
                               const AdalConfig& config) {
  const double rho = config.rho;
  const ArmijoParams& arm = config.armijo;
  const size_t n = view.num_vars();
  InnerResult result;
  std::vector<double>& x = result.x;
  x.assign(view.own_flows().begin(), view.own_flows().end());
  InnerStats& stats = result.stats;

  std::vector<double> g(n), u(n), trial(n);
  double fx = local_al_value(view, x, rho);
  stats.values.push_back(fx);

  for (int t = 0; t < config.inner_max_iters; ++t) {
    local_al_gradient(view, x, rho, g);
    if (projected_gradient_norm(x, g) <= config.inner_tol) {
      stats.converged = true;
      break;
    }
    std::vector<double> diag;
    if (config.scaling != Scaling::kUnscaled)
      diag = local_al_hessian_diag(view, x, rho, config.scaling);
    const std::vector<double> dir = scaled_direction(g, diag, config.scaling);

    double slope = 0.0;  // <dir, u>
    for (size_t k = 0; k < n; ++k) {
      u[k] = std::max(0.0, x[k] + arm.initial_step * dir[k]) - x[k];
      slope += dir[k] * u[k];
    }

    double step = 1.0;
    int trials = 1;
    double f_trial = 0.0;
    for (;; ++trials, step *= arm.beta) {
      for (size_t k = 0; k < n; ++k) trial[k] = x[k] + step * u[k];
      f_trial = local_al_value(view, trial, rho);
      if (fx - f_trial >= arm.sigma * step * slope) break;
      if (trials >= arm.max_trials)
        throw LineSearchError(
            view.node(), "Armijo search at node " + std::to_string(view.node()) +
                             " exceeded " + std::to_string(arm.max_trials) +
                             " trials");
    }
    x.swap(trial);
    fx = f_trial;
    ++stats.iterations;
    stats.steps.push_back(step);
    stats.trials.push_back(trials);
    stats.values.push_back(fx);
  }
  if (!stats.converged) {
    local_al_gradient(view, x, rho, g);
    stats.converged = projected_gradient_norm(x, g) <= config.inner_tol;
  }
  return result;
}

AdalState AdalState::zero(const FlowProblem& problem) {
  return {problem.zero_flow(), problem.zero_dual(), 0,
          std::vector<InnerStats>(problem.num_nodes())};
}

void adal_outer_step(AdalState& state, const FlowProblem& problem,
                     const AdalConfig& config, AccessLog* log) {
  const Topology& topo = problem.topology();
  const int n = problem.num_nodes();
  const int m_count = problem.num_commodities();
  const double tau = resolve_tau(config, problem.neighborhoods());
  const int threads =
      config.threads > 0 ? config.threads : default_thread_count();

  // Step 1: every subproblem sees the same snapshot (x^k, lambda^k).
  std::vector<std::vector<double>> minimizers(n);
  state.inner.assign(n, {});
  parallel_for(n, threads, [&](int i) {
    const NodeLocalView view =
        build_local_view(problem, i, state.x, state.lambda, log);
    try {
      InnerResult r = armijo_inner_solve(view, config);
      minimizers[i] = std::move(r.x);
      state.inner[i] = std::move(r.stats);
    } catch (const LineSearchError&) {
      throw;
    } catch (const Error& e) {
      throw Error("node " + std::to_string(i) + ": " + e.what());
    }
  });

  // Step 2: relaxed primal update.
  for (int i = 0; i < n; ++i) {
    auto xi = state.x.slice(topo.first_out(i), topo.end_out(i));
    for (size_t k = 0; k < xi.size(); ++k)
      xi[k] += tau * (minimizers[i][k] - xi[k]);
  }

  // Step 3: multipliers from the residual at x^(k+1).
  for (int i = 0; i < n; ++i) {
    if (log) {
      for (int a = topo.first_out(i); a < topo.end_out(i); ++a)
        log->record(i, AccessKind::kFlow, i, a);
      for (int a : topo.in_arcs(i))
        log->record(i, AccessKind::kFlow, topo.arc(a).tail, a);
    }
    for (int m = 0; m < m_count; ++m) {
      double r = -problem.demand(i, m);
      for (int a = topo.first_out(i); a < topo.end_out(i); ++a)
        r += state.x.at(a, m);
      for (int a : topo.in_arcs(i)) r -= state.x.at(a, m);
      state.lambda.at(i, m) += config.rho * tau * r;
    }
  }
  ++state.k;
}

void ArmijoTotals::add(const InnerStats& stats) {
  ++subproblems;
  if (inner_iters_histogram.size() <= static_cast<size_t>(stats.iterations))
    inner_iters_histogram.resize(stats.iterations + 1, 0);
  ++inner_iters_histogram[stats.iterations];
  inner_iterations += stats.iterations;
  for (size_t t = 0; t < stats.trials.size(); ++t) {
    const int tr = stats.trials[t];
    if (trials_histogram.size() <= static_cast<size_t>(tr))
      trials_histogram.resize(tr + 1, 0);
    ++trials_histogram[tr];
    trials += tr;
    step_sum += stats.steps[t];
  }
}

double ArmijoTotals::mean_trials() const {
  return inner_iterations ? static_cast<double>(trials) / inner_iterations
                          : 0.0;
}

double ArmijoTotals::mean_step() const {
  return inner_iterations ? step_sum / inner_iterations : 0.0;
}

double ArmijoTotals::mean_inner_iters() const {
  return subproblems ? static_cast<double>(inner_iterations) / subproblems
                     : 0.0;
}

AdalResult solve_adal(const FlowProblem& problem, const AdalConfig& config,
                      AccessLog* log) {
  validate(config, problem.neighborhoods());
  const auto start = std::chrono::steady_clock::now();
  AdalState state = AdalState::zero(problem);
  AdalResult result;
  result.trace = SolveTrace(config.trace_stride);
  SolveStatus status = SolveStatus::kMaxIters;

  for (long k = 1; k <= config.max_iters; ++k) {
    adal_outer_step(state, problem, config, log);

    ArmijoTotals step_totals;
    for (int i = 0; i < problem.num_nodes(); ++i) {
      const InnerStats& s = state.inner[i];
      step_totals.add(s);
      result.armijo.add(s);
      result.armijo_records.push_back(
          {k, i, s.iterations, s.mean_step(), s.mean_trials()});
    }

    TraceRow row;
    row.iter = k;
    row.objective = objective(problem, state.x);
    row.violation = violation_metric(problem, state.x);
    row.iterate_objective = row.objective;
    row.iterate_violation = row.violation;
    row.mean_inner_iters = step_totals.mean_inner_iters();
    row.mean_step = step_totals.mean_step();
    row.mean_armijo_trials = step_totals.mean_trials();
    row.elapsed_s = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    if (!std::isfinite(row.objective) || !std::isfinite(row.violation))
      throw DivergedError(k, "ADAL diverged at outer iteration " +
                                 std::to_string(k));
    result.trace.record(row);
    if (row.violation <= config.violation_tol) {
      status = SolveStatus::kTolerance;
      break;
    }
  }
  result.trace.finish(status);
  result.flow = std::move(state.x);
  result.lambda = std::move(state.lambda);
  return result;
}

}  // namespace beamflow
