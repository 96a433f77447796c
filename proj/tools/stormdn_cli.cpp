// stormdn: wind, failure probabilities, failure statistics, SAA planning and
// LP export from one config file.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "stormdn/bundle.hpp"
#include "stormdn/io.hpp"
#include "stormdn/lp_format.hpp"
#include "stormdn/saa.hpp"

using namespace stormdn;
namespace fs = std::filesystem;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
  std::optional<std::string> feeder, track, grid, scenarios;
  std::optional<int> G, Y, K;
  std::optional<double> time_limit;
  std::optional<long> log_every;
};

RunConfig load(const Globals& g) {
  RunConfig c = g.config.empty() ? RunConfig{} : read_config(g.config);
  if (g.seed) c.seed = *g.seed;
  if (g.workers) c.workers = *g.workers;
  if (g.out) c.out = *g.out;
  if (g.feeder) c.feeder = *g.feeder;
  if (g.track) c.track = *g.track;
  if (g.grid) c.grid = *g.grid;
  if (g.scenarios) c.scenarios = *g.scenarios;
  if (g.G) c.G = *g.G;
  if (g.Y) c.Y = *g.Y;
  if (g.K) c.K = *g.K;
  if (g.time_limit) c.solver.time_limit_s = *g.time_limit;
  if (g.log_every) c.solver.log_every = *g.log_every;
  if (c.workers < 1) throw InvalidInput("workers must be >= 1");
  return c;
}

const std::string& need(const std::string& path, const char* what) {
  if (path.empty()) throw InvalidInput(std::string("no ") + what + " given (config or --" + what + ")");
  return path;
}

MipOptions mip_options(const RunConfig& c) {
  MipOptions o;
  o.rel_gap = c.solver.rel_gap;
  o.time_limit_s = c.solver.time_limit_s;
  o.node_limit = c.solver.node_limit;
  if (c.solver.log_every > 0) {
    o.log = &std::cerr;
    o.log_every = c.solver.log_every;
  }
  return o;
}

std::ofstream create(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return open_out(p);
}

std::vector<LineIntensity> probabilities(const RunConfig& c, const Feeder& f) {
  return failure_probabilities(f, read_track(need(c.track, "track")), read_grid(need(c.grid, "grid")), c.nhpp);
}

// ------------------------------------------------------------ commands --
int cmd_wind(const RunConfig& c) {
  const StormTrack t = read_track(need(c.track, "track"));
  const Grid g = read_grid(need(c.grid, "grid"));
  auto os = create(fs::path(c.out) / "wind.csv");
  CsvWriter w(os, c.seed, {"t", "h", "v"});
  for (double h : storm_hours(t)) {
    for (const auto& s : wind_field_at(t, g.cells(), h)) w.row({fmt_num(s.t), std::to_string(s.cell), fmt_num(s.v)});
  }
  std::cout << (fs::path(c.out) / "wind.csv").string() << '\n';
  return 0;
}

int cmd_probabilities(const RunConfig& c) {
  const auto ff = read_feeder(need(c.feeder, "feeder"));
  const Feeder& f = ff.feeder;
  const auto lines = probabilities(c, f);
  auto os = create(fs::path(c.out) / "probabilities.csv");
  CsvWriter w(os, c.seed, {"edge", "from", "to", "length_km", "lambda", "p"});
  for (const auto& l : lines) {
    const Edge& e = f.edges[l.edge];
    w.row({std::to_string(l.edge), f.nodes[e.from].name, f.nodes[e.to].name, fmt_num(e.length_km()), fmt_num(l.lambda),
           fmt_num(l.p)});
  }
  std::cout << (fs::path(c.out) / "probabilities.csv").string() << '\n';
  return 0;
}

int cmd_stats(const RunConfig& c, std::optional<int> samples) {
  const auto ff = read_feeder(need(c.feeder, "feeder"));
  const Feeder& f = ff.feeder;
  const auto p = probabilities_of(probabilities(c, f));
  const int n = samples ? *samples : c.sampling.n_samples;
  // Stream 1 of the master seed; stream 0 belongs to scenario selection.
  const FailureStats st = failure_statistics(f, p, n, Rng(c.seed).fork(1), c.workers);
  const fs::path dir(c.out);
  {
    auto os = create(dir / "stats_summary.csv");
    CsvWriter w(os, c.seed, {"quantity", "value"});
    w.row({"samples", std::to_string(n)});
    w.row({"p_mean", fmt_num(st.p_mean)});
    w.row({"p_min", fmt_num(st.p_min)});
    w.row({"p_max", fmt_num(st.p_max)});
    w.row({"mean_failures", fmt_num(st.mean_failures)});
    w.row({"failures_std_error", fmt_num(st.failures_std_error)});
    w.row({"island_size_median", fmt_num(st.island_size_median)});
    w.row({"island_size_min", std::to_string(st.island_size_min)});
    w.row({"island_size_max", std::to_string(st.island_size_max)});
  }
  {
    auto os = create(dir / "failure_histogram.csv");
    CsvWriter w(os, c.seed, {"failures", "samples", "probability"});
    for (auto [k, v] : st.failure_histogram) w.row({std::to_string(k), std::to_string(v), fmt_num(double(v) / n)});
  }
  {
    auto os = create(dir / "island_count_histogram.csv");
    CsvWriter w(os, c.seed, {"islands", "samples"});
    for (auto [k, v] : st.island_count_histogram) w.row({std::to_string(k), std::to_string(v)});
  }
  {
    auto os = create(dir / "island_size_histogram.csv");
    CsvWriter w(os, c.seed, {"size", "islands"});
    for (auto [k, v] : st.island_size_histogram) w.row({std::to_string(k), std::to_string(v)});
  }
  std::cout << "failure probability  mean " << fmt_num(st.p_mean) << "  min " << fmt_num(st.p_min) << "  max "
            << fmt_num(st.p_max) << '\n'
            << "failures per sample  mean " << fmt_num(st.mean_failures) << " (se " << fmt_num(st.failures_std_error)
            << ")\n"
            << "island size          median " << fmt_num(st.island_size_median) << "  min " << st.island_size_min
            << "  max " << st.island_size_max << '\n';
  return 0;
}

struct Scenarios {
  std::vector<FailureScenario> list;
  std::vector<double> p;
};

Scenarios scenarios_for(const RunConfig& c, const Feeder& f) {
  Scenarios s;
  if (!c.scenarios.empty()) {
    ScenarioSet set = read_scenario_set(c.scenarios);
    for (const auto& sc : set.scenarios) {
      if (static_cast<int>(sc.failed.size()) != f.num_edges()) throw InvalidInput(c.scenarios + ": scenario length");
    }
    s.list = std::move(set.scenarios);
    s.p = std::move(set.p);
    return s;
  }
  s.p = probabilities_of(probabilities(c, f));
  PipelineOptions o;
  o.sampling = c.sampling;
  o.seed = c.seed;
  s.list = select_for_pipeline(s.p, o);
  return s;
}

PipelineOptions pipeline_options(const RunConfig& c, bool per_scenario) {
  PipelineOptions o;
  o.nhpp = c.nhpp;
  o.sampling = c.sampling;
  o.seed = c.seed;
  o.G = c.G;
  o.Y = c.Y;
  o.K = c.K;
  o.mip = mip_options(c);
  o.per_scenario_a = per_scenario;
  o.workers = c.workers;
  return o;
}

RunInfo run_info(const RunConfig& c, const std::vector<double>& p) {
  RunInfo info;
  info.seed = c.seed;
  info.feeder = c.feeder;
  info.track = c.scenarios.empty() ? c.track : c.scenarios;
  info.nhpp = c.nhpp;
  info.sampling = c.sampling;
  info.p = p;
  info.workers = c.workers;
  return info;
}

// "G=0..2" -> {0, 1, 2}; "Y=3" -> {3}
std::pair<char, std::vector<int>> parse_range(const std::string& s) {
  static const std::regex re(R"(^\s*([GYgy])\s*=\s*(\d+)(?:\s*\.\.\s*(\d+))?\s*$)");
  std::smatch m;
  if (!std::regex_match(s, m, re)) throw InvalidInput("bad --sweep term '" + s + "' (expected G=a..b or Y=c..d)");
  const int lo = std::stoi(m[2]);
  const int hi = m[3].matched ? std::stoi(m[3]) : lo;
  if (hi < lo) throw InvalidInput("empty --sweep range '" + s + "'");
  std::vector<int> v;
  for (int i = lo; i <= hi; ++i) v.push_back(i);
  return {static_cast<char>(std::toupper(m[1].str()[0])), v};
}

int status_code(const MipSolution& s) {
  return s.status == MipStatus::Optimal ? 0 : 3;
}

int cmd_plan(const RunConfig& c, const std::vector<std::string>& sweep_terms, bool per_scenario,
             const std::string& export_path, bool paren) {
  const auto ff = read_feeder(need(c.feeder, "feeder"));
  const Feeder& f = ff.feeder;
  const Scenarios sc = scenarios_for(c, f);
  const PipelineOptions o = pipeline_options(c, per_scenario);
  const std::string track_name = c.scenarios.empty() ? track_id(c.track) : fs::path(c.scenarios).stem().string();
  const RunInfo info = run_info(c, sc.p);

  if (!export_path.empty()) {
    const ResourceLimits lim{c.G, c.Y, c.K ? *c.K : horizon_K(f, sc.list, c.Y)};
    export_lp_file(build_saa_mip(f, ff.der, sc.list, lim).model, export_path,
                   paren ? LpNameStyle::Paren : LpNameStyle::Bracket);
  }

  if (sweep_terms.empty()) {
    const PipelineResult r = plan_with_scenarios(f, ff.der, sc.list, o, track_name);
    write_bundle(c.out, r, f, info);
    std::cout << "objective " << fmt_num(r.saa.objective) << " (" << to_string(r.saa.mip.status) << ", "
              << r.saa.mip.nodes << " nodes)\n"
              << "bundle " << c.out << '\n';
    for (const auto& wmsg : r.saa.warnings) std::cerr << "warning: " << wmsg << '\n';
    return status_code(r.saa.mip);
  }

  std::vector<int> Gs{c.G}, Ys{c.Y};
  for (const auto& t : sweep_terms) {
    auto [key, vals] = parse_range(t);
    (key == 'G' ? Gs : Ys) = vals;
  }
  const auto cells = sweep(f, ff.der, sc.list, o, Gs, Ys, track_name);
  const fs::path dir(c.out);
  auto summary = create(dir / "sweep.csv");
  CsvWriter sw(summary, c.seed, {"G", "Y", "K", "objective", "site_cost", "status", "gap", "nodes"});
  auto curves = create(dir / "sweep_curves.csv");
  CsvWriter cw(curves, c.seed, {"G", "Y", "k", "performance"});
  int code = 0;
  for (const auto& cell : cells) {
    const auto& s = cell.result.saa;
    write_bundle(dir / ("G" + std::to_string(cell.G) + "_Y" + std::to_string(cell.Y)), cell.result, f, info);
    sw.row({std::to_string(cell.G), std::to_string(cell.Y), std::to_string(s.limits.K), fmt_num(s.objective),
            fmt_num(s.site_cost), to_string(s.mip.status), fmt_num(s.mip.gap), std::to_string(s.mip.nodes)});
    for (std::size_t k = 0; k < cell.result.curve.performance.size(); ++k) {
      cw.row({std::to_string(cell.G), std::to_string(cell.Y), std::to_string(k),
              fmt_num(cell.result.curve.performance[k])});
    }
    std::cout << "G=" << cell.G << " Y=" << cell.Y << "  objective " << fmt_num(s.objective) << " ("
              << to_string(s.mip.status) << ")\n";
    code = std::max(code, status_code(s.mip));
  }
  return code;
}

int cmd_export_lp(const RunConfig& c, const std::string& path, bool paren) {
  const auto ff = read_feeder(need(c.feeder, "feeder"));
  const Feeder& f = ff.feeder;
  const Scenarios sc = scenarios_for(c, f);
  const ResourceLimits lim{c.G, c.Y, c.K ? *c.K : horizon_K(f, sc.list, c.Y)};
  const SaaModel sm = build_saa_mip(f, ff.der, sc.list, lim);
  export_lp_file(sm.model, path, paren ? LpNameStyle::Paren : LpNameStyle::Bracket);
  const auto st = sm.model.stats();
  std::cout << path << ": rows " << st.rows << ", columns " << st.columns << ", binaries " << st.binaries
            << ", nonzeros " << st.nonzeros << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Storm-aware DER siting and repair planning for distribution feeders"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "run config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--workers", g.workers, "worker threads");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--feeder", g.feeder, "feeder file");
  app.add_option("--track", g.track, "storm track file");
  app.add_option("--grid", g.grid, "grid file");

  auto* wind = app.add_subcommand("wind", "hourly wind speed per grid cell");
  auto* prob = app.add_subcommand("probabilities", "per-line failure probabilities");
  auto* stats = app.add_subcommand("stats", "sampled failure counts and island sizes");
  std::optional<int> samples;
  stats->add_option("--samples", samples, "number of sampled scenarios");

  auto* plan = app.add_subcommand("plan", "solve the SAA siting problem and write a results bundle");
  std::vector<std::string> sweep_terms;
  bool per_scenario = false, paren = false;
  std::string plan_export;
  plan->add_option("--G", g.G, "DER budget");
  plan->add_option("--Y", g.Y, "repairs per period");
  plan->add_option("--K", g.K, "last period (default: repair horizon)");
  plan->add_option("--scenarios", g.scenarios, "pre-selected scenario set (JSON)");
  plan->add_option("--sweep", sweep_terms, "grid such as G=0..2 Y=1..3")->expected(1, 2);
  plan->add_flag("--per-scenario-a", per_scenario, "curve from per-scenario allocations");
  plan->add_option("--export-lp", plan_export, "also write the SAA model as an LP file");
  plan->add_flag("--paren-names", paren, "write P(3,2,1) instead of P[3,2,1] in LP output");
  plan->add_option("--time-limit", g.time_limit, "solver time limit, seconds");
  plan->add_option("--log-every", g.log_every, "print a B&B log line every N nodes");

  auto* exp = app.add_subcommand("export-lp", "write the SAA model as an LP file");
  std::string exp_path;
  exp->add_option("path", exp_path, "output .lp file")->required();
  exp->add_option("--G", g.G, "DER budget");
  exp->add_option("--Y", g.Y, "repairs per period");
  exp->add_option("--K", g.K, "last period");
  exp->add_option("--scenarios", g.scenarios, "pre-selected scenario set (JSON)");
  exp->add_flag("--paren-names", paren, "write P(3,2,1) instead of P[3,2,1]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    const RunConfig c = load(g);
    if (*wind) return cmd_wind(c);
    if (*prob) return cmd_probabilities(c);
    if (*stats) return cmd_stats(c, samples);
    if (*plan) return cmd_plan(c, sweep_terms, per_scenario, plan_export, paren);
    if (*exp) return cmd_export_lp(c, exp_path, paren);
  } catch (const InfeasibleModel& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return 2;
  } catch (const SolverLimit& e) {
    std::cerr << "solver limit: " << e.what() << '\n';
    return 3;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
