#ifndef BEAMFLOW_PROBLEM_H_
#define BEAMFLOW_PROBLEM_H_

#include <span>
#include <vector>

#include "beamflow/netmodel.h"

namespace beamflow {

// One source -> sink traffic demand of `rate` bits/s/Hz.
struct Commodity {
  int source = 0;
  int sink = 0;
  double rate = 0.0;

  friend bool operator==(const Commodity&, const Commodity&) = default;
};

using CommoditySet = std::vector<Commodity>;

// Throws ValidationError ("commodities[k].sink", ...) on the first bad entry.
void validate(const CommoditySet& commodities, int num_nodes);

// Per-(arc, commodity) flow in bits/s/Hz, stored arc-major. Because arcs are
// sorted by tail, the variables a node routes form one contiguous slice.
class FlowState {
 public:
  FlowState() = default;
  FlowState(int num_arcs, int num_commodities)
      : num_arcs_(num_arcs),
        num_commodities_(num_commodities),
        x_(static_cast<size_t>(num_arcs) * num_commodities, 0.0) {}

  int num_arcs() const { return num_arcs_; }
  int num_commodities() const { return num_commodities_; }

  double& at(int arc, int m) { return x_[index(arc, m)]; }
  double at(int arc, int m) const { return x_[index(arc, m)]; }

  // Sum over commodities on one arc.
  double arc_total(int arc) const;

  std::span<double> values() { return x_; }
  std::span<const double> values() const { return x_; }

  // Variables of arcs [first_arc, end_arc), i.e. a node's local vector.
  std::span<double> slice(int first_arc, int end_arc) {
    return std::span<double>(x_).subspan(index(first_arc, 0),
                                         index(end_arc, 0) - index(first_arc, 0));
  }
  std::span<const double> slice(int first_arc, int end_arc) const {
    return std::span<const double>(x_).subspan(
        index(first_arc, 0), index(end_arc, 0) - index(first_arc, 0));
  }

  friend bool operator==(const FlowState&, const FlowState&) = default;

 private:
  size_t index(int arc, int m) const {
    return static_cast<size_t>(arc) * num_commodities_ + m;
  }

  int num_arcs_ = 0;
  int num_commodities_ = 0;
  std::vector<double> x_;
};

// One multiplier per (node, commodity), node-major.
class DualState {
 public:
  DualState() = default;
  DualState(int num_nodes, int num_commodities)
      : num_nodes_(num_nodes),
        num_commodities_(num_commodities),
        v_(static_cast<size_t>(num_nodes) * num_commodities, 0.0) {}

  int num_nodes() const { return num_nodes_; }
  int num_commodities() const { return num_commodities_; }
  double& at(int node, int m) { return v_[index(node, m)]; }
  double at(int node, int m) const { return v_[index(node, m)]; }
  std::span<double> values() { return v_; }
  std::span<const double> values() const { return v_; }

  friend bool operator==(const DualState&, const DualState&) = default;

 private:
  size_t index(int node, int m) const {
    return static_cast<size_t>(node) * num_commodities_ + m;
  }

  int num_nodes_ = 0;
  int num_commodities_ = 0;
  std::vector<double> v_;
};

// The convex multicommodity flow problem
//   min  sum_arcs w_ij 2^(sum_m x_ij(m))
//   s.t. outflow_i(m) - inflow_i(m) = d_i(m),  x >= 0
// with w_ij = f_iC / f_ij and net-outflow demands d (+R at source, -R at sink).
class FlowProblem {
 public:
  FlowProblem(NetworkScenario scenario, CommoditySet commodities);

  const NetworkScenario& scenario() const { return scenario_; }
  const Topology& topology() const { return topology_; }
  const Neighborhoods& neighborhoods() const { return neighborhoods_; }
  const CommoditySet& commodities() const { return commodities_; }

  int num_nodes() const { return topology_.num_nodes(); }
  int num_arcs() const { return topology_.num_arcs(); }
  int num_commodities() const { return static_cast<int>(commodities_.size()); }

  double weight(int arc) const { return weight_[arc]; }
  double arc_gain(int arc) const { return arc_gain_[arc]; }
  double station_gain(int node) const { return station_gain_[node]; }
  double demand(int node, int m) const {
    return demand_[static_cast<size_t>(node) * num_commodities() + m];
  }

  FlowState zero_flow() const { return {num_arcs(), num_commodities()}; }
  DualState zero_dual() const { return {num_nodes(), num_commodities()}; }

 private:
  NetworkScenario scenario_;
  Topology topology_;
  Neighborhoods neighborhoods_;
  CommoditySet commodities_;
  std::vector<double> weight_;
  std::vector<double> arc_gain_;
  std::vector<double> station_gain_;
  std::vector<double> demand_;
};

// Validates both inputs and throws ValidationError on bad commodity endpoints.
FlowProblem build_problem(NetworkScenario scenario, CommoditySet commodities);

double objective(const FlowProblem& problem, const FlowState& flow);

// residual_i(m) = outflow_i(m) - inflow_i(m) - d_i(m), node-major. All zero
// iff the flow is conserving.
std::vector<double> conservation_residual(const FlowProblem& problem,
                                          const FlowState& flow);

struct NodePower {
  double intra_power_w = 0.0;    // sum_j P_ij
  double station_power_w = 0.0;  // P_max - sum_j P_ij
  bool feasible = true;          // sum_j P_ij <= P_max
};

struct PowerReport {
  std::vector<double> arc_power_w;
  std::vector<NodePower> nodes;

  bool feasible() const;
  double total_intra_power_w() const;
  // Total power left for the station link, sum_i P_iC.
  double station_received_power_w() const;
  std::vector<int> infeasible_nodes() const;
};

// P_ij = c^-1(sum_m x_ij(m)) on every arc plus the per-node budget split.
// Budget violations are reported, never thrown.
PowerReport recover_powers(const FlowProblem& problem, const FlowState& flow);

// R_C = W log2(1 + sum_i P_iC f_iC) in bits/s.
double station_rate(const FlowProblem& problem, const PowerReport& powers);

}  // namespace beamflow

#endif  // BEAMFLOW_PROBLEM_H_
