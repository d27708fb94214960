#include "beamflow/netmodel.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "beamflow/error.h"

namespace beamflow {

namespace {

std::string node_field(int index, const char* member) {
  return "nodes[" + std::to_string(index) + "]." + member;
}

std::string arc_field(int index) {
  return "arcs[" + std::to_string(index) + "]";
}

bool finite(Vec2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

}  // namespace

double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

void validate(const NetworkScenario& s) {
  const RfParams& rf = s.rf;
  if (!(rf.carrier_freq_hz > 0.0) || !std::isfinite(rf.carrier_freq_hz))
    throw ValidationError("carrier_freq_hz", "must be positive");
  if (!(rf.bandwidth_hz > 0.0) || !std::isfinite(rf.bandwidth_hz))
    throw ValidationError("bandwidth_hz", "must be positive");
  if (!(rf.noise_temp_kelvin > 0.0) || !std::isfinite(rf.noise_temp_kelvin))
    throw ValidationError("noise_temp_kelvin", "must be positive");
  if (!(rf.p_max_watts > 0.0) || !std::isfinite(rf.p_max_watts))
    throw ValidationError("p_max_watts", "must be positive");
  if (s.nodes.empty()) throw ValidationError("nodes", "must not be empty");
  if (!finite(s.station))
    throw ValidationError("station", "coordinates must be finite");

  for (int k = 0; k < s.num_nodes(); ++k) {
    const Node& n = s.nodes[k];
    if (n.id != k)
      throw ValidationError(node_field(k, "id"),
                            "ids must be contiguous from 0 (expected " +
                                std::to_string(k) + ", got " +
                                std::to_string(n.id) + ")");
    if (!finite(n.position))
      throw ValidationError(node_field(k, "position"),
                            "coordinates must be finite");
    if (!(distance(n.position, s.station) > 0.0))
      throw ValidationError(node_field(k, "position"),
                            "coincides with the station");
  }

  for (int a = 0; a < s.num_arcs(); ++a) {
    const Arc& arc = s.arcs[a];
    if (arc.tail < 0 || arc.tail >= s.num_nodes() || arc.head < 0 ||
        arc.head >= s.num_nodes())
      throw ValidationError(arc_field(a), "endpoint is not a node id");
    if (arc.tail == arc.head)
      throw ValidationError(arc_field(a), "self-loop");
    if (a > 0 && !(s.arcs[a - 1] < arc))
      throw ValidationError(arc_field(a), "arcs must be sorted and unique");
    if (!(distance(s.nodes[arc.tail].position, s.nodes[arc.head].position) >
          0.0))
      throw ValidationError(arc_field(a), "endpoints share a position");
  }
}

void canonicalize_arcs(std::vector<Arc>& arcs) {
  std::sort(arcs.begin(), arcs.end());
  arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());
}

double path_loss(double distance_m, const RfParams& rf) {
  if (!(distance_m > 0.0))
    throw DomainError("path_loss: distance must be positive");
  const double k = 4.0 * std::numbers::pi / rf.wavelength_m();
  return 1.0 / (rf.noise_density() * rf.bandwidth_hz * k * k * distance_m *
                distance_m);
}

double capacity(double power_watts, double gain) {
  if (power_watts < 0.0)
    throw DomainError("capacity: power must be nonnegative");
  if (!(gain > 0.0)) throw DomainError("capacity: gain must be positive");
  return std::log1p(gain * power_watts) / std::numbers::ln2;
}

double capacity_inverse(double rate, double gain) {
  if (rate < 0.0)
    throw DomainError("capacity_inverse: rate must be nonnegative");
  if (!(gain > 0.0))
    throw DomainError("capacity_inverse: gain must be positive");
  // expm1 keeps full relative precision for small rates.
  return std::expm1(std::numbers::ln2 * rate) / gain;
}

Topology::Topology(const NetworkScenario& scenario)
    : arcs_(scenario.arcs),
      out_begin_(scenario.num_nodes() + 1, 0),
      in_arcs_(scenario.num_nodes()) {
  for (const Arc& a : arcs_) ++out_begin_[a.tail + 1];
  for (int i = 0; i < scenario.num_nodes(); ++i)
    out_begin_[i + 1] += out_begin_[i];
  for (int a = 0; a < num_arcs(); ++a) in_arcs_[arcs_[a].head].push_back(a);
}

int Topology::find_arc(int tail, int head) const {
  auto first = arcs_.begin() + first_out(tail);
  auto last = arcs_.begin() + end_out(tail);
  auto it = std::lower_bound(first, last, Arc{tail, head});
  if (it != last && it->head == head)
    return static_cast<int>(it - arcs_.begin());
  return -1;
}

bool Neighborhoods::in_one_hop(int node, int other) const {
  return std::binary_search(one_hop[node].begin(), one_hop[node].end(), other);
}

bool Neighborhoods::in_two_hop(int node, int other) const {
  return std::binary_search(two_hop[node].begin(), two_hop[node].end(), other);
}

Neighborhoods build_neighborhoods(const NetworkScenario& scenario) {
  const int n = scenario.num_nodes();
  Neighborhoods nb;
  nb.one_hop.assign(n, {});
  nb.two_hop.assign(n, {});
  for (const Arc& a : scenario.arcs) {
    nb.one_hop[a.tail].push_back(a.head);
    nb.one_hop[a.head].push_back(a.tail);
  }
  for (auto& set : nb.one_hop) {
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    nb.max_degree = std::max(nb.max_degree, static_cast<int>(set.size()));
  }
  for (int i = 0; i < n; ++i) {
    std::vector<int>& t = nb.two_hop[i];
    t = nb.one_hop[i];
    for (int j : nb.one_hop[i])
      for (int k : nb.one_hop[j])
        if (k != i) t.push_back(k);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
  }
  return nb;
}

NetworkScenario grid_scenario(const GridParams& p) {
  NetworkScenario s;
  s.rf = p.rf;
  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  for (int r = 0; r < p.rows; ++r) {
    for (int c = 0; c < p.cols; ++c) {
      Vec2 pos{c * p.spacing_m, r * p.spacing_m};
      if (p.jitter_m > 0.0) {
        pos.x += p.jitter_m * jitter(rng);
        pos.y += p.jitter_m * jitter(rng);
      }
      s.nodes.push_back({r * p.cols + c, pos});
    }
  }
  for (int r = 0; r < p.rows; ++r) {
    for (int c = 0; c < p.cols; ++c) {
      const int id = r * p.cols + c;
      if (c + 1 < p.cols) {
        s.arcs.push_back({id, id + 1});
        s.arcs.push_back({id + 1, id});
      }
      if (r + 1 < p.rows) {
        s.arcs.push_back({id, id + p.cols});
        s.arcs.push_back({id + p.cols, id});
      }
    }
  }
  canonicalize_arcs(s.arcs);

  if (p.station) {
    s.station = *p.station;
  } else {
    Vec2 centroid;
    for (const Node& n : s.nodes) {
      centroid.x += n.position.x;
      centroid.y += n.position.y;
    }
    centroid.x /= s.num_nodes();
    centroid.y /= s.num_nodes();
    const double eps = 1e-9 * std::max(p.spacing_m, 1.0);
    for (const Node& n : s.nodes) {
      if (distance(n.position, centroid) <= eps) {
        centroid.x += 0.5 * p.spacing_m;
        break;
      }
    }
    s.station = centroid;
  }
  return s;
}

}  // namespace beamflow
