#ifndef BEAMFLOW_OSPF_H_
#define BEAMFLOW_OSPF_H_

#include <vector>

#include "beamflow/netmodel.h"
#include "beamflow/problem.h"

namespace beamflow {

enum class RouteMetric { kDistance, kHops };

// Minimum-cost path source -> sink under Euclidean arc length (or unit cost
// per hop). Among equal-cost paths the lexicographically smallest node
// sequence wins; costs within 1e-12 relative count as equal. Throws
// NoRouteError when the sink is unreachable.
std::vector<int> shortest_path(const NetworkScenario& scenario, int source,
                               int sink,
                               RouteMetric metric = RouteMetric::kDistance);

struct RouteResult {
  std::vector<std::vector<int>> paths;  // one per commodity
  FlowState flow;
  PowerReport powers;
};

// Loads each commodity's full rate onto its shortest path. Throws
// NoRouteError listing every unroutable commodity.
RouteResult route_ospf(const FlowProblem& problem,
                       RouteMetric metric = RouteMetric::kDistance);

}  // namespace beamflow

#endif  // BEAMFLOW_OSPF_H_
