#include "beamflow/ospf.h"

#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <string>

#include "beamflow/error.h"

namespace beamflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double arc_cost(const NetworkScenario& s, const Arc& a, RouteMetric metric) {
  if (metric == RouteMetric::kHops) return 1.0;
  return distance(s.nodes[a.tail].position, s.nodes[a.head].position);
}

bool same_cost(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

}  // namespace

std::vector<int> shortest_path(const NetworkScenario& scenario, int source,
                               int sink, RouteMetric metric) {
  const Topology topo(scenario);
  const int n = topo.num_nodes();
  if (source < 0 || source >= n || sink < 0 || sink >= n)
    throw NoRouteError({}, "shortest_path: endpoint out of range");

  // Dijkstra toward the sink over reversed arcs.
  std::vector<double> to_sink(n, kInf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  to_sink[sink] = 0.0;
  queue.push({0.0, sink});
  while (!queue.empty()) {
    auto [d, v] = queue.top();
    queue.pop();
    if (d > to_sink[v]) continue;
    for (int a : topo.in_arcs(v)) {
      const int u = topo.arc(a).tail;
      const double nd = d + arc_cost(scenario, topo.arc(a), metric);
      if (nd < to_sink[u]) {
        to_sink[u] = nd;
        queue.push({nd, u});
      }
    }
  }
  if (to_sink[source] == kInf)
    throw NoRouteError({}, "no route from node " + std::to_string(source) +
                               " to node " + std::to_string(sink));

  // Greedy walk: the smallest-id successor on some shortest path. Arcs are
  // sorted by head within a tail, so the first match is the smallest id.
  std::vector<int> path{source};
  int v = source;
  while (v != sink) {
    int next = -1;
    for (int a = topo.first_out(v); a < topo.end_out(v); ++a) {
      const int w = topo.arc(a).head;
      if (to_sink[w] == kInf) continue;
      if (same_cost(to_sink[v],
                    arc_cost(scenario, topo.arc(a), metric) + to_sink[w])) {
        next = w;
        break;
      }
    }
    if (next < 0 || path.size() > static_cast<size_t>(n))
      throw Error("shortest_path: inconsistent distance labels");
    path.push_back(next);
    v = next;
  }
  return path;
}

RouteResult route_ospf(const FlowProblem& problem, RouteMetric metric) {
  RouteResult result;
  result.flow = problem.zero_flow();
  std::vector<int> failed;
  std::string failed_desc;
  const Topology& topo = problem.topology();
  for (int m = 0; m < problem.num_commodities(); ++m) {
    const Commodity& c = problem.commodities()[m];
    try {
      result.paths.push_back(
          shortest_path(problem.scenario(), c.source, c.sink, metric));
    } catch (const NoRouteError&) {
      failed.push_back(m);
      failed_desc += (failed_desc.empty() ? "" : ", ") + std::to_string(m) +
                     " (" + std::to_string(c.source) + "->" +
                     std::to_string(c.sink) + ")";
      result.paths.emplace_back();
      continue;
    }
    const std::vector<int>& path = result.paths.back();
    for (size_t k = 0; k + 1 < path.size(); ++k)
      result.flow.at(topo.find_arc(path[k], path[k + 1]), m) += c.rate;
  }
  if (!failed.empty())
    throw NoRouteError(failed, "no route for commodities " + failed_desc);
  result.powers = recover_powers(problem, result.flow);
  return result;
}

}  // namespace beamflow
