#ifndef BEAMFLOW_METRICS_H_
#define BEAMFLOW_METRICS_H_

#include "beamflow/problem.h"

namespace beamflow {

// L1 norm of the conservation residual over all nodes and commodities.
double violation_metric(const FlowProblem& problem, const FlowState& flow);

}  // namespace beamflow

#endif  // BEAMFLOW_METRICS_H_
