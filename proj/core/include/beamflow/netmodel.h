#ifndef BEAMFLOW_NETMODEL_H_
#define BEAMFLOW_NETMODEL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace beamflow {

inline constexpr double kBoltzmann = 1.380649e-23;     // J/K
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

double distance(Vec2 a, Vec2 b);

struct Node {
  int id = 0;
  Vec2 position;

  friend bool operator==(const Node&, const Node&) = default;
};

// Directed arc tail -> head.
struct Arc {
  int tail = 0;
  int head = 0;

  friend bool operator==(const Arc&, const Arc&) = default;
  friend auto operator<=>(const Arc&, const Arc&) = default;
};

struct RfParams {
  double carrier_freq_hz = 1e9;
  double bandwidth_hz = 5e6;
  double noise_temp_kelvin = 290.0;
  double p_max_watts = 100.0;

  double wavelength_m() const { return kSpeedOfLight / carrier_freq_hz; }
  // Noise spectral density N0 = kT (W/Hz).
  double noise_density() const { return kBoltzmann * noise_temp_kelvin; }

  friend bool operator==(const RfParams&, const RfParams&) = default;
};

// Node geometry, the station receiver, and the directed arc set. Node ids are
// 0..N-1 and equal to their index in `nodes`. Arcs are kept sorted by
// (tail, head) so the out-arcs of a node form a contiguous range.
struct NetworkScenario {
  std::vector<Node> nodes;
  Vec2 station;
  std::vector<Arc> arcs;
  RfParams rf;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_arcs() const { return static_cast<int>(arcs.size()); }

  friend bool operator==(const NetworkScenario&,
                         const NetworkScenario&) = default;
};

// Throws ValidationError naming the first violated field.
void validate(const NetworkScenario& scenario);

// Sorts and de-duplicates arcs; undirected links are passed as both arcs.
void canonicalize_arcs(std::vector<Arc>& arcs);

// Line-of-sight loss coefficient f = 1 / (N0 W (4 pi / lambda)^2 d^2), in 1/W.
double path_loss(double distance_m, const RfParams& rf);

// Shannon capacity log2(1 + f P) in bits/s/Hz.
double capacity(double power_watts, double gain);

// Power needed to carry `rate` bits/s/Hz over a link with coefficient `gain`.
double capacity_inverse(double rate, double gain);

// Adjacency index over a scenario's arcs.
class Topology {
 public:
  explicit Topology(const NetworkScenario& scenario);

  int num_nodes() const { return static_cast<int>(in_arcs_.size()); }
  int num_arcs() const { return static_cast<int>(arcs_.size()); }
  const Arc& arc(int a) const { return arcs_[a]; }
  std::span<const Arc> arcs() const { return arcs_; }

  // Out-arcs of `node` are the contiguous arc range [first_out, end_out).
  int first_out(int node) const { return out_begin_[node]; }
  int end_out(int node) const { return out_begin_[node + 1]; }
  int out_degree(int node) const { return end_out(node) - first_out(node); }
  std::span<const int> in_arcs(int node) const { return in_arcs_[node]; }

  // Arc index for tail -> head, or -1.
  int find_arc(int tail, int head) const;

 private:
  std::vector<Arc> arcs_;
  std::vector<int> out_begin_;
  std::vector<std::vector<int>> in_arcs_;
};

// One-hop and two-hop neighbor sets, each sorted ascending.
struct Neighborhoods {
  std::vector<std::vector<int>> one_hop;
  std::vector<std::vector<int>> two_hop;
  int max_degree = 0;

  bool in_one_hop(int node, int other) const;
  bool in_two_hop(int node, int other) const;
};

Neighborhoods build_neighborhoods(const NetworkScenario& scenario);

struct GridParams {
  int rows = 6;
  int cols = 6;
  double spacing_m = 1000.0;
  // Each coordinate is perturbed by U(-jitter_m, jitter_m).
  double jitter_m = 0.0;
  std::uint64_t seed = 0;
  RfParams rf;
  std::optional<Vec2> station;
};

// Row-major lattice (node id = r * cols + c at (c * spacing, r * spacing)),
// 4-adjacent links in both directions. The station defaults to the node
// centroid; when that lands on a node it moves half a spacing along +x.
NetworkScenario grid_scenario(const GridParams& params);

}  // namespace beamflow

#endif  // BEAMFLOW_NETMODEL_H_
