#ifndef BEAMFLOW_IO_H_
#define BEAMFLOW_IO_H_

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>

#include "beamflow/adal.h"
#include "beamflow/netmodel.h"
#include "beamflow/problem.h"
#include "beamflow/trace.h"

namespace beamflow {

// Scenario JSON:
//   {"nodes": [{"id": 0, "x": 0.0, "y": 0.0}, ...],
//    "station": {"x": ..., "y": ...},
//    "arcs": [[tail, head], ...],        directed
//    "links": [[a, b], ...],             optional, undirected (both arcs)
//    "carrier_freq_hz": 1e9, "bandwidth_hz": 5e6,
//    "noise_temp_kelvin": 290, "p_max_watts": 100}
// Positions in meters. Parsing canonicalizes arcs and validates; errors
// name the offending field.
NetworkScenario scenario_from_json(std::string_view text);
std::string scenario_to_json(const NetworkScenario& scenario);
NetworkScenario load_scenario(const std::filesystem::path& path);
void save_scenario(const NetworkScenario& scenario,
                   const std::filesystem::path& path);

// Commodity JSON: [{"source": 0, "sink": 35, "rate": 9.0}, ...]. Endpoints
// are checked against the scenario by build_problem.
CommoditySet commodities_from_json(std::string_view text);
std::string commodities_to_json(const CommoditySet& commodities);
CommoditySet load_commodities(const std::filesystem::path& path);
void save_commodities(const CommoditySet& commodities,
                      const std::filesystem::path& path);

// Doubles are written with 17 significant digits so files round-trip and
// are byte-stable across runs.
std::string format_double(double v);

// node,intra_power_w,station_power_w,feasible
void write_power_csv(std::ostream& out, const PowerReport& powers);

enum class TraceKind { kPrimalDual, kAdal, kSingleShot };

// primal-dual: iter,objective,violation,iterate_objective,iterate_violation
// adal:        iter,objective,violation,mean_inner_iters,mean_step,
//              mean_armijo_trials
// single-shot: iter,objective,violation
// With a reference objective, an objective_error column |f - f_ref| follows
// the objective column. Wall-clock is not written.
void write_trace_csv(std::ostream& out, const SolveTrace& trace,
                     TraceKind kind, const double* reference = nullptr);

// outer_iter,node,inner_iters,mean_step,mean_armijo_trials
void write_armijo_csv(std::ostream& out,
                      const std::vector<ArmijoRecord>& records);

// method,metric,bin,count with metric in {inner_iters, armijo_trials}.
void write_armijo_histogram_csv(std::ostream& out, std::string_view method,
                                const ArmijoTotals& totals,
                                bool header = true);

// Writes `contents` to `path`, throwing Error with the path on failure.
void write_file(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace beamflow

#endif  // BEAMFLOW_IO_H_
