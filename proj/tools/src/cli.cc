#include "beamflow/cli.h"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "beamflow/error.h"
#include "beamflow/harness.h"
#include "beamflow/io.h"

namespace beamflow::cli {

namespace {

namespace fs = std::filesystem;

// Flags shared by solve and compare.
struct RunOptions {
  std::string scenario_path;
  bool paper = false;
  int rows = 6;
  int cols = 6;
  double spacing = 1000.0;
  double jitter = 0.0;
  std::uint64_t seed = 0;
  std::string commodities_path;
  std::vector<std::string> commodity_specs;
  std::string out_dir;
  bool no_oracle = false;

  double alpha = 0.0, pd_tol = 0.0;
  long pd_max_iters = 0;
  double rho = 0.0, tau = 0.0, inner_tol = 0.0, adal_tol = 0.0;
  int inner_max_iters = 0, max_trials = 0, threads = 0;
  long max_iters = 0, trace_stride = 0;
  double armijo_s = 0.0, armijo_beta = 0.0, armijo_sigma = 0.0;
  std::string scaling, metric;
};

struct Options {
  CLI::Option* rows;
  CLI::Option* cols;
  CLI::Option* spacing;
  CLI::Option* jitter;
  CLI::Option* seed;
  std::vector<std::pair<CLI::Option*, std::function<void(CompareConfig&)>>>
      overrides;
};

void add_scenario_flags(CLI::App& cmd, RunOptions& o, Options& opts) {
  auto* scenario = cmd.add_option("--scenario", o.scenario_path,
                                  "Scenario JSON file");
  auto* paper = cmd.add_flag(
      "--paper", o.paper,
      "6x6 reproduction preset: 44.3 km grid, commodities 0->35 and 5->30 at "
      "R=9, P_max 100 W, 1 GHz, 5 MHz, inner tolerance 1e-3");
  scenario->excludes(paper);
  opts.rows = cmd.add_option("--rows", o.rows, "Grid rows")->capture_default_str();
  opts.cols = cmd.add_option("--cols", o.cols, "Grid columns")->capture_default_str();
  opts.spacing = cmd.add_option("--spacing", o.spacing, "Grid spacing (m)")
                     ->capture_default_str();
  opts.jitter = cmd.add_option("--jitter", o.jitter, "Position jitter (m)")
                    ->capture_default_str();
  opts.seed = cmd.add_option("--seed", o.seed, "Jitter seed")->capture_default_str();
  for (CLI::Option* g : {opts.rows, opts.cols, opts.spacing, opts.jitter, opts.seed}) {
    g->excludes(scenario);
    g->excludes(paper);
  }
  cmd.add_option("--commodities", o.commodities_path, "Commodity JSON file");
  cmd.add_option("--commodity", o.commodity_specs,
                 "Inline commodity SOURCE,SINK,RATE (repeatable)");
  cmd.add_option("--out", o.out_dir, "Output directory")->required();
  cmd.add_flag("--no-oracle", o.no_oracle,
               "Skip the path-enumeration reference objective");
}

template <typename T>
void override_flag(CLI::App& cmd, Options& opts, const std::string& name,
                   T& slot, const std::string& help,
                   std::function<void(CompareConfig&, T)> apply) {
  CLI::Option* opt = cmd.add_option(name, slot, help);
  opts.overrides.emplace_back(
      opt, [apply, &slot](CompareConfig& c) { apply(c, slot); });
}

void add_solver_flags(CLI::App& cmd, RunOptions& o, Options& opts) {
  override_flag<double>(cmd, opts, "--alpha", o.alpha,
                        "primal-dual step size (default 1e-3)",
                        [](CompareConfig& c, double v) { c.pd.alpha = v; });
  override_flag<long>(cmd, opts, "--pd-max-iters", o.pd_max_iters,
                      "primal-dual iteration cap (default 200000)",
                      [](CompareConfig& c, long v) { c.pd.max_iters = v; });
  override_flag<double>(cmd, opts, "--pd-tol", o.pd_tol,
                        "primal-dual violation tolerance (default 1e-3)",
                        [](CompareConfig& c, double v) { c.pd.violation_tol = v; });
  override_flag<double>(cmd, opts, "--rho", o.rho, "ADAL penalty (default 1)",
                        [](CompareConfig& c, double v) { c.adal.rho = v; });
  override_flag<double>(cmd, opts, "--tau", o.tau,
                        "ADAL relaxation in (0, 1/d_max) (default 0.9/d_max)",
                        [](CompareConfig& c, double v) { c.adal.tau = v; });
  override_flag<double>(cmd, opts, "--inner-tol", o.inner_tol,
                        "inner stop tolerance (default 1e-3)",
                        [](CompareConfig& c, double v) { c.adal.inner_tol = v; });
  override_flag<int>(cmd, opts, "--inner-max-iters", o.inner_max_iters,
                     "inner iteration cap (default 200)",
                     [](CompareConfig& c, int v) { c.adal.inner_max_iters = v; });
  override_flag<double>(cmd, opts, "--armijo-s", o.armijo_s,
                        "Armijo initial step s (default 1)",
                        [](CompareConfig& c, double v) { c.adal.armijo.initial_step = v; });
  override_flag<double>(cmd, opts, "--armijo-beta", o.armijo_beta,
                        "Armijo backtracking factor (default 0.5)",
                        [](CompareConfig& c, double v) { c.adal.armijo.beta = v; });
  override_flag<double>(cmd, opts, "--armijo-sigma", o.armijo_sigma,
                        "Armijo sufficient-decrease factor (default 0.1)",
                        [](CompareConfig& c, double v) { c.adal.armijo.sigma = v; });
  override_flag<int>(cmd, opts, "--armijo-max-trials", o.max_trials,
                     "Armijo trial cap (default 60)",
                     [](CompareConfig& c, int v) { c.adal.armijo.max_trials = v; });
  override_flag<long>(cmd, opts, "--max-iters", o.max_iters,
                      "ADAL outer iteration cap (default 5000)",
                      [](CompareConfig& c, long v) { c.adal.max_iters = v; });
  override_flag<double>(cmd, opts, "--tol", o.adal_tol,
                        "ADAL violation tolerance (default 1e-3)",
                        [](CompareConfig& c, double v) { c.adal.violation_tol = v; });
  override_flag<int>(cmd, opts, "--threads", o.threads,
                     "ADAL worker threads (default BEAMFLOW_THREADS or all cores)",
                     [](CompareConfig& c, int v) { c.adal.threads = v; });
  override_flag<long>(cmd, opts, "--trace-stride", o.trace_stride,
                      "keep every n-th trace row (default 1)",
                      [](CompareConfig& c, long v) {
                        c.pd.trace_stride = v;
                        c.adal.trace_stride = v;
                      });
  override_flag<std::string>(
      cmd, opts, "--scaling", o.scaling,
      "paper_diagonal | full_diagonal | unscaled (default paper_diagonal)",
      [](CompareConfig& c, std::string v) { c.adal.scaling = parse_scaling(v); });
  opts.overrides.back().first->check(
      CLI::IsMember({"paper_diagonal", "full_diagonal", "unscaled"}));
  override_flag<std::string>(cmd, opts, "--metric", o.metric,
                             "OSPF edge metric: distance | hops (default distance)",
                             [](CompareConfig& c, std::string v) {
                               c.metric = v == "hops" ? RouteMetric::kHops
                                                      : RouteMetric::kDistance;
                             });
  opts.overrides.back().first->check(CLI::IsMember({"distance", "hops"}));
}

Commodity parse_commodity(const std::string& text, size_t index) {
  const std::string field = "--commodity[" + std::to_string(index) + "]";
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ',');) parts.push_back(part);
  if (parts.size() != 3)
    throw ValidationError(field, "expected SOURCE,SINK,RATE");
  try {
    size_t used = 0;
    Commodity c;
    c.source = std::stoi(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument(parts[0]);
    c.sink = std::stoi(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument(parts[1]);
    c.rate = std::stod(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument(parts[2]);
    return c;
  } catch (const std::logic_error&) {
    throw ValidationError(field, "expected SOURCE,SINK,RATE");
  }
}

struct Run {
  FlowProblem problem;
  CompareConfig config;
  nlohmann::json run_info;
};

Run prepare(const RunOptions& o, const Options& opts) {
  NetworkScenario scenario;
  CommoditySet commodities;
  CompareConfig config;
  nlohmann::json run_info;
  if (o.paper) {
    Preset preset = paper_preset();
    scenario = std::move(preset.scenario);
    commodities = std::move(preset.commodities);
    config = std::move(preset.config);
    run_info["scenario"] = "paper";
  } else if (!o.scenario_path.empty()) {
    scenario = load_scenario(o.scenario_path);
    run_info["scenario"] = o.scenario_path;
  } else {
    GridParams gp;
    gp.rows = o.rows;
    gp.cols = o.cols;
    gp.spacing_m = o.spacing;
    gp.jitter_m = o.jitter;
    gp.seed = o.seed;
    if (gp.rows < 1 || gp.cols < 1 || gp.rows * gp.cols < 2)
      throw ValidationError("--rows/--cols", "grid needs at least two nodes");
    scenario = grid_scenario(gp);
    run_info["scenario"] = {{"rows", o.rows}, {"cols", o.cols},
                        {"spacing_m", o.spacing}, {"jitter_m", o.jitter},
                        {"seed", o.seed}};
  }
  if (!o.commodities_path.empty() || !o.commodity_specs.empty()) {
    commodities.clear();
    if (!o.commodities_path.empty())
      commodities = load_commodities(o.commodities_path);
    for (size_t k = 0; k < o.commodity_specs.size(); ++k)
      commodities.push_back(parse_commodity(o.commodity_specs[k], k));
  }
  if (commodities.empty())
    throw ValidationError("--commodities",
                          "no commodities given (use --commodities, "
                          "--commodity or --paper)");
  for (const auto& [opt, apply] : opts.overrides)
    if (opt->count() > 0) apply(config);
  if (o.no_oracle) config.use_oracle = false;
  run_info["commodities"] = nlohmann::json::parse(commodities_to_json(commodities));
  return {build_problem(std::move(scenario), std::move(commodities)), config,
          run_info};
}

void report_infeasible(const SolverSummary& s, std::ostream& err) {
  err << fmt::format("{}: P_max budget exceeded at nodes [{}]\n",
                     to_string(s.kind),
                     fmt::join(s.powers.infeasible_nodes(), ", "));
}

int cmd_generate(int rows, int cols, double spacing, double jitter,
                 std::uint64_t seed, const std::string& out_path,
                 std::ostream& out) {
  GridParams gp;
  gp.rows = rows;
  gp.cols = cols;
  gp.spacing_m = spacing;
  gp.jitter_m = jitter;
  gp.seed = seed;
  if (rows < 1 || cols < 1 || rows * cols < 2)
    throw ValidationError("--rows/--cols", "grid needs at least two nodes");
  if (!(spacing > 0.0)) throw ValidationError("--spacing", "must be positive");
  if (!(jitter >= 0.0 && jitter < 0.5 * spacing))
    throw ValidationError("--jitter", "must lie in [0, spacing/2)");
  const NetworkScenario s = grid_scenario(gp);
  validate(s);
  save_scenario(s, out_path);
  out << fmt::format("wrote {}: {} nodes, {} arcs\n", out_path, s.num_nodes(),
                     s.num_arcs());
  return kOk;
}

int cmd_solve(const RunOptions& o, const Options& opts,
              const std::string& solver, std::ostream& out,
              std::ostream& err) {
  Run run = prepare(o, opts);
  const SolverKind kind = parse_solver(solver);
  run.config.solvers = {kind};
  run.config.concurrent = false;
  ComparisonReport report = compare_solvers(run.problem, run.config);
  const SolverSummary& s = report.solvers.front();

  const fs::path dir = o.out_dir;
  fs::create_directories(dir);
  std::ostringstream trace, powers;
  const TraceKind trace_kind = kind == SolverKind::kPrimalDual ? TraceKind::kPrimalDual
                               : kind == SolverKind::kAdal     ? TraceKind::kAdal
                                                               : TraceKind::kSingleShot;
  const double* reference =
      report.reference_source == "oracle" ? &report.reference_objective : nullptr;
  write_trace_csv(trace, s.trace, trace_kind, reference);
  write_file(dir / "trace.csv", trace.str());
  write_power_csv(powers, s.powers);
  write_file(dir / "powers.csv", powers.str());
  if (s.armijo) {
    std::ostringstream records, hist;
    write_armijo_csv(records, s.armijo_records);
    write_file(dir / "armijo.csv", records.str());
    write_armijo_histogram_csv(hist, "adal", *s.armijo);
    write_file(dir / "armijo_hist.csv", hist.str());
  }
  nlohmann::json summary = nlohmann::json::parse(report_to_json(report));
  summary["run"] = run.run_info;
  summary["run"]["solver"] = solver;
  write_file(dir / "summary.json", summary.dump(2) + "\n");

  out << fmt::format(
      "{}: {} after {} iterations, objective {}, violation {:.3e}, "
      "intra-network power {:.6g} W, station rate {:.6g} bit/s\n",
      solver, to_string(s.status), s.iterations, format_double(s.final_objective),
      s.final_violation, s.total_intra_power_w, s.station_rate_bps);
  if (!s.power_feasible) {
    report_infeasible(s, err);
    return kInfeasible;
  }
  return kOk;
}

int cmd_compare(const RunOptions& o, const Options& opts,
                const std::vector<std::string>& solvers, std::ostream& out,
                std::ostream& err) {
  Run run = prepare(o, opts);
  run.config.solvers.clear();
  for (const std::string& name : solvers) {
    const SolverKind kind = parse_solver(name);
    if (std::find(run.config.solvers.begin(), run.config.solvers.end(), kind) ==
        run.config.solvers.end())
      run.config.solvers.push_back(kind);
  }
  if (run.config.solvers.size() < 2)
    throw CLI::ValidationError("--solvers", "compare needs at least two solvers");
  const ComparisonReport report = compare_solvers(run.problem, run.config);
  write_comparison(report, o.out_dir);
  nlohmann::json run_info = run.run_info;
  write_file(fs::path(o.out_dir) / "run.json", run_info.dump(2) + "\n");

  int status = kOk;
  out << fmt::format("reference objective {} ({})\n",
                     format_double(report.reference_objective),
                     report.reference_source);
  for (const SolverSummary& s : report.solvers) {
    auto milestone = [](const std::optional<long>& v) {
      return v ? std::to_string(*v) : std::string("-");
    };
    out << fmt::format(
        "{:>5}: objective {:.10g}, violation {:.3e}, iterations {}, "
        "to 1e-2 {}, intra power {:.6g} W, station power {:.6g} W\n",
        to_string(s.kind), s.final_objective, s.final_violation, s.iterations,
        milestone(s.iters_to_violation[1]), s.total_intra_power_w,
        s.station_received_power_w);
    if (!s.power_feasible) {
      report_infeasible(s, err);
      status = kInfeasible;
    }
  }
  return status;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Distributed multicommodity routing for power-constrained "
               "wireless relay networks"};
  app.name("beamflow");
  app.require_subcommand(1);

  int g_rows = 6, g_cols = 6;
  double g_spacing = 1000.0, g_jitter = 0.0;
  std::uint64_t g_seed = 0;
  std::string g_out;
  CLI::App* generate = app.add_subcommand("generate", "Write a grid scenario");
  generate->add_option("--rows", g_rows, "Grid rows")->capture_default_str();
  generate->add_option("--cols", g_cols, "Grid columns")->capture_default_str();
  generate->add_option("--spacing", g_spacing, "Grid spacing (m)")
      ->capture_default_str();
  generate->add_option("--jitter", g_jitter, "Position jitter (m)")
      ->capture_default_str();
  generate->add_option("--seed", g_seed, "Jitter seed")->capture_default_str();
  generate->add_option("--out", g_out, "Scenario JSON path")->required();

  RunOptions solve_opts;
  Options solve_flags;
  std::string solver;
  CLI::App* solve = app.add_subcommand("solve", "Run one solver");
  add_scenario_flags(*solve, solve_opts, solve_flags);
  solve->add_option("--solver", solver, "pd | adal | ospf")
      ->required()
      ->check(CLI::IsMember({"pd", "adal", "ospf"}));
  add_solver_flags(*solve, solve_opts, solve_flags);

  RunOptions cmp_opts;
  Options cmp_flags;
  std::vector<std::string> solvers;
  CLI::App* compare = app.add_subcommand("compare", "Run and compare solvers");
  add_scenario_flags(*compare, cmp_opts, cmp_flags);
  compare->add_option("--solvers", solvers, "Two or more of pd, adal, ospf")
      ->required()
      ->delimiter(',')
      ->check(CLI::IsMember({"pd", "adal", "ospf"}));
  add_solver_flags(*compare, cmp_opts, cmp_flags);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (*generate)
      return cmd_generate(g_rows, g_cols, g_spacing, g_jitter, g_seed, g_out,
                          out);
    if (*solve) return cmd_solve(solve_opts, solve_flags, solver, out, err);
    return cmd_compare(cmp_opts, cmp_flags, solvers, out, err);
  } catch (const CLI::CallForHelp&) {
    out << (app.got_subcommand(generate) ? generate->help()
            : app.got_subcommand(solve)  ? solve->help()
            : app.got_subcommand(compare) ? compare->help()
                                          : app.help());
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const NoRouteError& e) {
    err << "no route: " << e.what() << "\n";
    return kNoRoute;
  } catch (const DivergedError& e) {
    err << "diverged: " << e.what() << "\n";
    return kDiverged;
  } catch (const LineSearchError& e) {
    err << "line search failed: " << e.what() << "\n";
    return kLineSearch;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace beamflow::cli
