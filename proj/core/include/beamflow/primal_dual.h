#ifndef BEAMFLOW_PRIMAL_DUAL_H_
#define BEAMFLOW_PRIMAL_DUAL_H_

#include "beamflow/access_log.h"
#include "beamflow/problem.h"
#include "beamflow/trace.h"

namespace beamflow {

struct PrimalDualConfig {
  double alpha = 1e-3;
  long max_iters = 200000;
  double violation_tol = 1e-3;
  long trace_stride = 1;
};

// Throws ValidationError on alpha <= 0 or max_iters < 1.
void validate(const PrimalDualConfig& config);

struct PrimalDualState {
  FlowState x;
  DualState p;
  FlowState x_avg;
  long k = 0;

  static PrimalDualState zero(const FlowProblem& problem);
};

// x_ij(m) <- [x_ij(m) - alpha (ln2 w_ij 2^(sum_m' x_ij(m')) + p_j(m) - p_i(m))]_+
// evaluated at the current (x, p). Reads are reported per routing node.
FlowState primal_step(const PrimalDualState& state, const FlowProblem& problem,
                      const PrimalDualConfig& config,
                      AccessLog* log = nullptr);

// p_i(m) <- p_i(m) - alpha * residual_i(m), using the current x.
DualState dual_step(const PrimalDualState& state, const FlowProblem& problem,
                    const PrimalDualConfig& config, AccessLog* log = nullptr);

// Folds state.x into the running mean. state.k must already count state.x
// among the iterates (k >= 1).
void average_update(PrimalDualState& state);

// One Jacobi iteration: both steps from the same (x^k, p^k), then averaging.
void primal_dual_iteration(PrimalDualState& state, const FlowProblem& problem,
                           const PrimalDualConfig& config,
                           AccessLog* log = nullptr);

// Runs until the averaged flow's violation reaches violation_tol or
// max_iters; returns the averaged flow. Throws DivergedError on non-finite
// values.
SolveResult solve_pd(const FlowProblem& problem,
                     const PrimalDualConfig& config);

}  // namespace beamflow

#endif  // BEAMFLOW_PRIMAL_DUAL_H_
