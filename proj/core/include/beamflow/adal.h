#ifndef BEAMFLOW_ADAL_H_
#define BEAMFLOW_ADAL_H_

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "beamflow/access_log.h"
#include "beamflow/problem.h"
#include "beamflow/trace.h"

namespace beamflow {

// Preconditioner for the inner projected-gradient direction.
//   kPaperDiagonal: constant 2 rho, i.e. direction -g / (2 rho).
//   kFullDiagonal:  2 rho + ln2^2 w_il 2^(y_il), the exact Hessian diagonal.
//   kUnscaled:      direction -g.
enum class Scaling { kPaperDiagonal, kFullDiagonal, kUnscaled };

std::string_view to_string(Scaling scaling);
// Accepts "paper_diagonal", "full_diagonal", "unscaled".
Scaling parse_scaling(std::string_view name);

struct ArmijoParams {
  double initial_step = 1.0;  // s
  double beta = 0.5;
  double sigma = 0.1;
  int max_trials = 60;
};

struct AdalConfig {
  double rho = 1.0;
  // Relaxation in (0, 1/d_max); unset means 0.9 / d_max.
  std::optional<double> tau;
  double inner_tol = 1e-3;
  int inner_max_iters = 200;
  ArmijoParams armijo;
  Scaling scaling = Scaling::kPaperDiagonal;
  long max_iters = 5000;
  double violation_tol = 1e-3;
  // 0 means default_thread_count().
  int threads = 0;
  long trace_stride = 1;
};

double resolve_tau(const AdalConfig& config, const Neighborhoods& nb);

// Throws ValidationError naming the offending field.
void validate(const AdalConfig& config, const Neighborhoods& nb);

// Everything node i may use to minimize its local augmented Lagrangian:
// its arc weights, its own flows, multipliers of itself and its out-neighbors,
// and the snapshot residual rows it touches. Rows are built from flows of
// nodes within two hops only.
//
// Local variables are ordered (local arc a, commodity m) -> a * M + m where
// local arc a is the a-th out-arc of i.
class NodeLocalView {
 public:
  int node() const { return node_; }
  int num_commodities() const { return m_; }
  int num_local_arcs() const { return static_cast<int>(heads_.size()); }
  int num_vars() const { return num_local_arcs() * m_; }

  std::span<const int> heads() const { return heads_; }
  std::span<const int> arc_ids() const { return arc_ids_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const double> own_flows() const { return own_flows_; }

  double own_multiplier(int m) const { return own_lambda_[m]; }
  double head_multiplier(int a, int m) const { return head_lambda_[a * m_ + m]; }

  // Residual rows with node i's own contribution removed:
  //   own_base(m)    = -inflow_i(m) - d_i(m)
  //   head_base(a,m) = outflow_l(m) - inflow_l(m) excluding x_il - d_l(m)
  double own_base(int m) const { return own_base_[m]; }
  double head_base(int a, int m) const { return head_base_[a * m_ + m]; }

  // Owners of the neighbor flows copied into this view, sorted, excluding i.
  std::span<const int> flow_sources() const { return flow_sources_; }
  // Nodes whose multipliers were copied, sorted (includes i).
  std::span<const int> multiplier_sources() const {
    return multiplier_sources_;
  }

 private:
  friend NodeLocalView build_local_view(const FlowProblem&, int,
                                        const FlowState&, const DualState&,
                                        AccessLog*);
  int node_ = 0;
  int m_ = 0;
  std::vector<int> heads_;
  std::vector<int> arc_ids_;
  std::vector<double> weights_;
  std::vector<double> own_flows_;
  std::vector<double> own_lambda_;
  std::vector<double> head_lambda_;
  std::vector<double> own_base_;
  std::vector<double> head_base_;
  std::vector<int> flow_sources_;
  std::vector<int> multiplier_sources_;
};

// Copies node `node`'s local data out of the global snapshot. Every read of
// shared state goes through `log` when given.
NodeLocalView build_local_view(const FlowProblem& problem, int node,
                               const FlowState& x, const DualState& lambda,
                               AccessLog* log = nullptr);

// Local augmented Lagrangian restricted to the residual rows node i affects:
//   sum_a w_a 2^(y_a) + sum_{a,m} x_am (lambda_i(m) - lambda_l(m))
//   + rho/2 sum_m [ r_i(m)^2 + sum_a r_l(m)^2 ]
// Rows outside {i} and its out-neighbors do not depend on x_i and are left
// out, so this differs from the full-network form by a constant.
double local_al_value(const NodeLocalView& view,
                      std::span<const double> candidate, double rho);

void local_al_gradient(const NodeLocalView& view,
                       std::span<const double> candidate, double rho,
                       std::span<double> out);
std::vector<double> local_al_gradient(const NodeLocalView& view,
                                      std::span<const double> candidate,
                                      double rho);

// Hessian diagonal used as the preconditioner. `mode` must be one of the
// diagonal modes.
std::vector<double> local_al_hessian_diag(const NodeLocalView& view,
                                          std::span<const double> candidate,
                                          double rho, Scaling mode);

// -g / diag entrywise, or -g when unscaled. Throws DomainError on a
// nonpositive diagonal entry.
std::vector<double> scaled_direction(std::span<const double> gradient,
                                     std::span<const double> diag,
                                     Scaling mode);

struct InnerStats {
  int iterations = 0;
  bool converged = false;
  // One entry per inner iteration: accepted step beta^m and trials m + 1.
  std::vector<double> steps;
  std::vector<int> trials;
  // Local AL value at each accepted point, starting with the initial point.
  std::vector<double> values;

  double mean_step() const;
  double mean_trials() const;
};

struct InnerResult {
  std::vector<double> x;
  InnerStats stats;
};

// Scaled projected gradient with the Armijo rule
//   L(x) - L(x + beta^m u) >= sigma beta^m <dir, u>,  u = [x + s dir]_+ - x,
// started from the view's own flows and stopped when
// ||[x - grad L(x)]_+ - x||_2 <= inner_tol. Throws LineSearchError after
// armijo.max_trials rejected trials.
InnerResult armijo_inner_solve(const NodeLocalView& view,
                               const AdalConfig& config);

struct AdalState {
  FlowState x;
  DualState lambda;
  long k = 0;
  // Inner statistics of the most recent outer step, indexed by node.
  std::vector<InnerStats> inner;

  static AdalState zero(const FlowProblem& problem);
};

// Jacobi step: every node minimizes against the same snapshot, then
// x <- x + tau (x_hat - x), then lambda_i(m) += rho tau residual_i(m) at the
// new x. Node subproblems run on config.threads workers; the result does not
// depend on the thread count. Inner failures are rethrown tagged with the
// node id. Does not validate tau.
void adal_outer_step(AdalState& state, const FlowProblem& problem,
                     const AdalConfig& config, AccessLog* log = nullptr);

struct ArmijoRecord {
  long outer_iter = 0;
  int node = 0;
  int inner_iters = 0;
  double mean_step = 0.0;
  double mean_trials = 0.0;
};

// Run-wide Armijo totals. trials_histogram[t] counts inner iterations that
// needed t trials (accepted step beta^(t-1)).
struct ArmijoTotals {
  std::vector<long> trials_histogram;
  std::vector<long> inner_iters_histogram;
  long subproblems = 0;
  long inner_iterations = 0;
  long trials = 0;
  double step_sum = 0.0;

  void add(const InnerStats& stats);
  double mean_trials() const;
  double mean_step() const;
  double mean_inner_iters() const;
};

struct AdalResult {
  FlowState flow;
  DualState lambda;
  SolveTrace trace;
  std::vector<ArmijoRecord> armijo_records;
  ArmijoTotals armijo;
};

// Validates the config, starts from x = 0 and lambda = 0, and iterates until
// the violation of x^(k+1) reaches violation_tol or max_iters. Throws
// DivergedError on non-finite values.
AdalResult solve_adal(const FlowProblem& problem, const AdalConfig& config,
                      AccessLog* log = nullptr);

}  // namespace beamflow

#endif  // BEAMFLOW_ADAL_H_
