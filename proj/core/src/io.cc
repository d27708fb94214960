#include "beamflow/io.h"

#include <fmt/format.h>

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "beamflow/error.h"

namespace beamflow {

using nlohmann::json;

namespace {

const json& member(const json& obj, const std::string& key,
                   const std::string& where) {
  if (!obj.is_object())
    throw ValidationError(where.empty() ? "(root)" : where,
                          "expected an object");
  auto it = obj.find(key);
  if (it == obj.end())
    throw ValidationError(where.empty() ? key : where + "." + key,
                          "missing field");
  return *it;
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ValidationError(field, "expected a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& field) {
  if (!v.is_number_integer())
    throw ValidationError(field, "expected an integer");
  return v.get<int>();
}

double number_or(const json& obj, const std::string& key, double fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : number(*it, key);
}

std::vector<Arc> arc_list(const json& v, const std::string& field) {
  if (!v.is_array()) throw ValidationError(field, "expected an array");
  std::vector<Arc> out;
  for (size_t k = 0; k < v.size(); ++k) {
    const std::string f = field + "[" + std::to_string(k) + "]";
    if (!v[k].is_array() || v[k].size() != 2)
      throw ValidationError(f, "expected a [tail, head] pair");
    out.push_back({integer(v[k][0], f), integer(v[k][1], f)});
  }
  return out;
}

json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("(document)", e.what());
  }
}

}  // namespace

NetworkScenario scenario_from_json(std::string_view text) {
  const json doc = parse(text);
  NetworkScenario s;
  const json& nodes = member(doc, "nodes", "");
  if (!nodes.is_array()) throw ValidationError("nodes", "expected an array");
  for (size_t k = 0; k < nodes.size(); ++k) {
    const std::string where = "nodes[" + std::to_string(k) + "]";
    Node n;
    n.id = integer(member(nodes[k], "id", where), where + ".id");
    n.position.x = number(member(nodes[k], "x", where), where + ".x");
    n.position.y = number(member(nodes[k], "y", where), where + ".y");
    s.nodes.push_back(n);
  }
  const json& station = member(doc, "station", "");
  s.station.x = number(member(station, "x", "station"), "station.x");
  s.station.y = number(member(station, "y", "station"), "station.y");

  if (doc.contains("arcs")) s.arcs = arc_list(doc["arcs"], "arcs");
  if (doc.contains("links")) {
    for (const Arc& a : arc_list(doc["links"], "links")) {
      s.arcs.push_back(a);
      s.arcs.push_back({a.head, a.tail});
    }
  }
  // Duplicate arcs are rejected rather than merged.
  const size_t before = s.arcs.size();
  canonicalize_arcs(s.arcs);
  if (s.arcs.size() != before)
    throw ValidationError("arcs", "duplicate arc");

  RfParams rf;
  rf.carrier_freq_hz = number_or(doc, "carrier_freq_hz", rf.carrier_freq_hz);
  rf.bandwidth_hz = number_or(doc, "bandwidth_hz", rf.bandwidth_hz);
  rf.noise_temp_kelvin =
      number_or(doc, "noise_temp_kelvin", rf.noise_temp_kelvin);
  rf.p_max_watts = number_or(doc, "p_max_watts", rf.p_max_watts);
  s.rf = rf;
  validate(s);
  return s;
}

std::string scenario_to_json(const NetworkScenario& s) {
  json doc;
  json nodes = json::array();
  for (const Node& n : s.nodes)
    nodes.push_back({{"id", n.id}, {"x", n.position.x}, {"y", n.position.y}});
  doc["nodes"] = std::move(nodes);
  doc["station"] = {{"x", s.station.x}, {"y", s.station.y}};
  json arcs = json::array();
  for (const Arc& a : s.arcs) arcs.push_back({a.tail, a.head});
  doc["arcs"] = std::move(arcs);
  doc["carrier_freq_hz"] = s.rf.carrier_freq_hz;
  doc["bandwidth_hz"] = s.rf.bandwidth_hz;
  doc["noise_temp_kelvin"] = s.rf.noise_temp_kelvin;
  doc["p_max_watts"] = s.rf.p_max_watts;
  return doc.dump(2) + "\n";
}

NetworkScenario load_scenario(const std::filesystem::path& path) {
  return scenario_from_json(read_file(path));
}

void save_scenario(const NetworkScenario& scenario,
                   const std::filesystem::path& path) {
  write_file(path, scenario_to_json(scenario));
}

CommoditySet commodities_from_json(std::string_view text) {
  const json doc = parse(text);
  if (!doc.is_array()) throw ValidationError("commodities", "expected a list");
  CommoditySet out;
  for (size_t k = 0; k < doc.size(); ++k) {
    const std::string where = "commodities[" + std::to_string(k) + "]";
    Commodity c;
    c.source = integer(member(doc[k], "source", where), where + ".source");
    c.sink = integer(member(doc[k], "sink", where), where + ".sink");
    c.rate = number(member(doc[k], "rate", where), where + ".rate");
    out.push_back(c);
  }
  return out;
}

std::string commodities_to_json(const CommoditySet& commodities) {
  json doc = json::array();
  for (const Commodity& c : commodities)
    doc.push_back({{"source", c.source}, {"sink", c.sink}, {"rate", c.rate}});
  return doc.dump(2) + "\n";
}

CommoditySet load_commodities(const std::filesystem::path& path) {
  return commodities_from_json(read_file(path));
}

void save_commodities(const CommoditySet& commodities,
                      const std::filesystem::path& path) {
  write_file(path, commodities_to_json(commodities));
}

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

void write_power_csv(std::ostream& out, const PowerReport& powers) {
  out << "node,intra_power_w,station_power_w,feasible\n";
  for (size_t i = 0; i < powers.nodes.size(); ++i) {
    const NodePower& n = powers.nodes[i];
    out << i << ',' << format_double(n.intra_power_w) << ','
        << format_double(n.station_power_w) << ','
        << (n.feasible ? "true" : "false") << '\n';
  }
}

void write_trace_csv(std::ostream& out, const SolveTrace& trace,
                     TraceKind kind, const double* reference) {
  out << "iter,objective";
  if (reference) out << ",objective_error";
  out << ",violation";
  if (kind == TraceKind::kPrimalDual)
    out << ",iterate_objective,iterate_violation";
  if (kind == TraceKind::kAdal)
    out << ",mean_inner_iters,mean_step,mean_armijo_trials";
  out << '\n';
  for (const TraceRow& r : trace.rows()) {
    out << r.iter << ',' << format_double(r.objective);
    if (reference) out << ',' << format_double(std::abs(r.objective - *reference));
    out << ',' << format_double(r.violation);
    if (kind == TraceKind::kPrimalDual)
      out << ',' << format_double(r.iterate_objective) << ','
          << format_double(r.iterate_violation);
    if (kind == TraceKind::kAdal)
      out << ',' << format_double(r.mean_inner_iters) << ','
          << format_double(r.mean_step) << ','
          << format_double(r.mean_armijo_trials);
    out << '\n';
  }
}

void write_armijo_csv(std::ostream& out,
                      const std::vector<ArmijoRecord>& records) {
  out << "outer_iter,node,inner_iters,mean_step,mean_armijo_trials\n";
  for (const ArmijoRecord& r : records)
    out << r.outer_iter << ',' << r.node << ',' << r.inner_iters << ','
        << format_double(r.mean_step) << ',' << format_double(r.mean_trials)
        << '\n';
}

void write_armijo_histogram_csv(std::ostream& out, std::string_view method,
                                const ArmijoTotals& totals, bool header) {
  if (header) out << "method,metric,bin,count\n";
  for (size_t b = 0; b < totals.inner_iters_histogram.size(); ++b)
    if (totals.inner_iters_histogram[b])
      out << method << ",inner_iters," << b << ','
          << totals.inner_iters_histogram[b] << '\n';
  for (size_t b = 0; b < totals.trials_histogram.size(); ++b)
    if (totals.trials_histogram[b])
      out << method << ",armijo_trials," << b << ','
          << totals.trials_histogram[b] << '\n';
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << contents;
  out.flush();
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace beamflow
