#ifndef BEAMFLOW_TRACE_H_
#define BEAMFLOW_TRACE_H_

#include <optional>
#include <string_view>
#include <vector>

#include "beamflow/problem.h"

namespace beamflow {

enum class SolveStatus { kRunning, kTolerance, kMaxIters };

std::string_view to_string(SolveStatus status);

struct TraceRow {
  long iter = 0;
  // Reported point (the running average for primal-dual).
  double objective = 0.0;
  double violation = 0.0;
  // Raw iterate. Equal to the reported point for ADAL and OSPF.
  double iterate_objective = 0.0;
  double iterate_violation = 0.0;
  // ADAL only: averages over the node subproblems of this outer iteration.
  double mean_inner_iters = 0.0;
  double mean_step = 0.0;
  double mean_armijo_trials = 0.0;
  double elapsed_s = 0.0;
};

// Per-iteration solver history. Every recorded row updates the milestone
// counters; rows are stored every `stride` iterations plus the final one.
class SolveTrace {
 public:
  static constexpr double kDefaultMilestones[] = {1e-1, 1e-2, 1e-3};

  explicit SolveTrace(long stride = 1);

  void record(const TraceRow& row);
  void finish(SolveStatus status);

  const std::vector<TraceRow>& rows() const { return rows_; }
  const TraceRow& last() const { return last_; }
  SolveStatus status() const { return status_; }
  long iterations() const { return last_.iter; }

  // First iteration whose reported violation was <= threshold; only the
  // thresholds in kDefaultMilestones are tracked.
  std::optional<long> first_below(double threshold) const;
  std::optional<long> first_iterate_below(double threshold) const;

 private:
  long stride_;
  std::vector<TraceRow> rows_;
  TraceRow last_;
  bool has_last_ = false;
  SolveStatus status_ = SolveStatus::kRunning;
  std::optional<long> reached_[3];
  std::optional<long> iterate_reached_[3];
};

struct SolveResult {
  FlowState flow;
  SolveTrace trace;
};

}  // namespace beamflow

#endif  // BEAMFLOW_TRACE_H_
