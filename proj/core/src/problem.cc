#include "beamflow/problem.h"

#include <cmath>
#include <numeric>
#include <string>

#include "beamflow/error.h"

namespace beamflow {

void validate(const CommoditySet& commodities, int num_nodes) {
  for (size_t k = 0; k < commodities.size(); ++k) {
    const Commodity& c = commodities[k];
    const std::string prefix = "commodities[" + std::to_string(k) + "].";
    if (c.source < 0 || c.source >= num_nodes)
      throw ValidationError(prefix + "source", "node " +
                                                   std::to_string(c.source) +
                                                   " is not in the scenario");
    if (c.sink < 0 || c.sink >= num_nodes)
      throw ValidationError(prefix + "sink", "node " + std::to_string(c.sink) +
                                                 " is not in the scenario");
    if (c.source == c.sink)
      throw ValidationError(prefix + "sink", "equals the source");
    if (!(c.rate > 0.0) || !std::isfinite(c.rate))
      throw ValidationError(prefix + "rate", "must be positive");
  }
}

double FlowState::arc_total(int arc) const {
  double y = 0.0;
  for (int m = 0; m < num_commodities_; ++m) y += at(arc, m);
  return y;
}

FlowProblem::FlowProblem(NetworkScenario scenario, CommoditySet commodities)
    : scenario_(std::move(scenario)),
      topology_(scenario_),
      neighborhoods_(build_neighborhoods(scenario_)),
      commodities_(std::move(commodities)) {
  const RfParams& rf = scenario_.rf;
  station_gain_.reserve(num_nodes());
  for (const Node& n : scenario_.nodes)
    station_gain_.push_back(
        path_loss(distance(n.position, scenario_.station), rf));
  for (const Arc& a : scenario_.arcs) {
    const double f = path_loss(distance(scenario_.nodes[a.tail].position,
                                        scenario_.nodes[a.head].position),
                               rf);
    arc_gain_.push_back(f);
    weight_.push_back(station_gain_[a.tail] / f);
  }
  const int m_count = num_commodities();
  demand_.assign(static_cast<size_t>(num_nodes()) * m_count, 0.0);
  for (int m = 0; m < m_count; ++m) {
    const Commodity& c = commodities_[m];
    demand_[static_cast<size_t>(c.source) * m_count + m] += c.rate;
    demand_[static_cast<size_t>(c.sink) * m_count + m] -= c.rate;
  }
}

FlowProblem build_problem(NetworkScenario scenario, CommoditySet commodities) {
  validate(scenario);
  validate(commodities, scenario.num_nodes());
  return FlowProblem(std::move(scenario), std::move(commodities));
}

double objective(const FlowProblem& problem, const FlowState& flow) {
  double total = 0.0;
  for (int a = 0; a < problem.num_arcs(); ++a)
    total += problem.weight(a) * std::exp2(flow.arc_total(a));
  return total;
}

std::vector<double> conservation_residual(const FlowProblem& problem,
                                          const FlowState& flow) {
  const int m_count = problem.num_commodities();
  std::vector<double> r(static_cast<size_t>(problem.num_nodes()) * m_count);
  for (int i = 0; i < problem.num_nodes(); ++i)
    for (int m = 0; m < m_count; ++m)
      r[static_cast<size_t>(i) * m_count + m] = -problem.demand(i, m);
  const Topology& topo = problem.topology();
  for (int a = 0; a < problem.num_arcs(); ++a) {
    const Arc& arc = topo.arc(a);
    for (int m = 0; m < m_count; ++m) {
      const double x = flow.at(a, m);
      r[static_cast<size_t>(arc.tail) * m_count + m] += x;
      r[static_cast<size_t>(arc.head) * m_count + m] -= x;
    }
  }
  return r;
}

bool PowerReport::feasible() const {
  for (const NodePower& n : nodes)
    if (!n.feasible) return false;
  return true;
}

double PowerReport::total_intra_power_w() const {
  return std::accumulate(nodes.begin(), nodes.end(), 0.0,
                         [](double acc, const NodePower& n) {
                           return acc + n.intra_power_w;
                         });
}

double PowerReport::station_received_power_w() const {
  return std::accumulate(nodes.begin(), nodes.end(), 0.0,
                         [](double acc, const NodePower& n) {
                           return acc + n.station_power_w;
                         });
}

std::vector<int> PowerReport::infeasible_nodes() const {
  std::vector<int> out;
  for (size_t i = 0; i < nodes.size(); ++i)
    if (!nodes[i].feasible) out.push_back(static_cast<int>(i));
  return out;
}

PowerReport recover_powers(const FlowProblem& problem, const FlowState& flow) {
  PowerReport report;
  report.arc_power_w.resize(problem.num_arcs());
  report.nodes.resize(problem.num_nodes());
  for (int a = 0; a < problem.num_arcs(); ++a) {
    // Clamp rounding-level negatives from relaxed iterates.
    const double rate = std::max(0.0, flow.arc_total(a));
    const double p = capacity_inverse(rate, problem.arc_gain(a));
    report.arc_power_w[a] = p;
    report.nodes[problem.topology().arc(a).tail].intra_power_w += p;
  }
  const double p_max = problem.scenario().rf.p_max_watts;
  for (NodePower& n : report.nodes) {
    n.station_power_w = p_max - n.intra_power_w;
    n.feasible = n.intra_power_w <= p_max;
  }
  return report;
}

double station_rate(const FlowProblem& problem, const PowerReport& powers) {
  double snr = 0.0;
  for (int i = 0; i < problem.num_nodes(); ++i)
    snr += powers.nodes[i].station_power_w * problem.station_gain(i);
  return problem.scenario().rf.bandwidth_hz * std::log2(1.0 + snr);
}

}  // namespace beamflow
