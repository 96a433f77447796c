#pragma once

// End-to-end planning: wind -> failure probabilities -> scenario selection ->
// SAA solve -> per-scenario trajectories and performance metrics.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stormdn/branch_and_bound.hpp"
#include "stormdn/error.hpp"
#include "stormdn/failure_model.hpp"
#include "stormdn/network_model.hpp"
#include "stormdn/rng.hpp"
#include "stormdn/stage2_model.hpp"
#include "stormdn/wind_field.hpp"
#include "stormdn/worker_pool.hpp"

namespace stormdn {

struct PeriodState {
  std::vector<double> lcc, kcc, pc, qc, pt, qt, nu;  // per node (index 0 unused except nu)
  std::vector<double> P, Q;                          // per edge
  std::vector<int> down;                             // per edge: 1 while failed
  std::vector<int> repaired;                         // edges repaired in this period
  std::vector<std::vector<double>> pg, qg;           // [node][der]
  double cost = 0.0;                                 // control + shedding cost
};

struct ScenarioResult {
  bool solved = false;
  FailureScenario scenario;
  Allocation allocation;  // the allocation these trajectories were computed under
  double J = 0.0;         // sum of period costs
  std::vector<PeriodState> periods;
};

struct SaaSolution {
  Allocation allocation;
  double objective = kInf;  // site cost + mean J
  double site_cost = 0.0;
  std::vector<ScenarioResult> scenarios;
  ResourceLimits limits;
  MipSolution mip;
  ModelStats stats;
  std::map<std::string, double> big_m;
  std::vector<std::string> warnings;
};

// Period cost c_k: control cost on served fraction plus shedding cost.
inline double period_cost(const Feeder& f, std::span<const double> lcc, std::span<const double> kcc) {
  double c = 0.0;
  for (int i = 1; i < f.num_nodes(); ++i) {
    c += f.nodes[i].cost_control * (1.0 - lcc[i]) + f.nodes[i].cost_shed * kcc[i];
  }
  return c;
}

inline double full_shed_cost(const Feeder& f) {
  double c = 0.0;
  for (int i = 1; i < f.num_nodes(); ++i) c += f.nodes[i].cost_control + f.nodes[i].cost_shed;
  return c;
}

inline Allocation extract_allocation(const SaaModel& sm, const Feeder& f, const std::vector<double>& x) {
  DerSpec der;
  der.count = sm.der_count;
  Allocation a = Allocation::empty(f, der);
  for (int i : sm.sites) {
    a.ysc[i] = std::lround(x[sm.index.at(Family::Ysc, {i})]) ? 1 : 0;
    for (int d = 0; d < sm.der_count; ++d) a.ygc[i][d] = std::lround(x[sm.index.at(Family::Ygc, {i, d})]) ? 1 : 0;
  }
  return a;
}

inline ScenarioResult extract_scenario(const SaaModel& sm, const Feeder& f, const std::vector<double>& x, int s) {
  ScenarioResult r;
  r.solved = true;
  r.scenario = sm.scenarios.at(s);
  r.allocation = extract_allocation(sm, f, x);
  const auto& ix = sm.index;
  const int n = f.num_nodes();
  const int E = f.num_edges();
  auto val = [&](Family fam, std::initializer_list<int> idx) { return x[ix.at(fam, idx)]; };
  auto bin = [&](Family fam, std::initializer_list<int> idx) { return static_cast<double>(std::lround(val(fam, idx))); };
  for (int k = 0; k <= sm.limits.K; ++k) {
    PeriodState p;
    p.lcc.assign(n, 1.0);
    p.kcc.assign(n, 0.0);
    p.pc.assign(n, 0.0);
    p.qc.assign(n, 0.0);
    p.pt.assign(n, 0.0);
    p.qt.assign(n, 0.0);
    p.nu.assign(n, 0.0);
    p.P.assign(E, 0.0);
    p.Q.assign(E, 0.0);
    p.down.assign(E, 0);
    p.pg.assign(n, std::vector<double>(sm.der_count, 0.0));
    p.qg.assign(n, std::vector<double>(sm.der_count, 0.0));
    for (int i = 0; i < n; ++i) p.nu[i] = val(Family::Nu, {i, k, s});
    for (int i = 1; i < n; ++i) {
      p.lcc[i] = val(Family::Lcc, {i, k, s});
      p.kcc[i] = bin(Family::Kcc, {i, k, s});
      p.pc[i] = val(Family::Pc, {i, k, s});
      p.qc[i] = val(Family::Qc, {i, k, s});
      p.pt[i] = val(Family::Pt, {i, k, s});
      p.qt[i] = val(Family::Qt, {i, k, s});
    }
    for (int i : sm.sites) {
      for (int d = 0; d < sm.der_count; ++d) {
        p.pg[i][d] = val(Family::Pg, {i, d, k, s});
        p.qg[i][d] = val(Family::Qg, {i, d, k, s});
      }
    }
    for (int e = 0; e < E; ++e) {
      p.P[e] = val(Family::P, {e, k, s});
      p.Q[e] = val(Family::Q, {e, k, s});
    }
    for (int e : sm.eff_edges[s]) {
      p.down[e] = static_cast<int>(bin(Family::Kline, {e, k, s}));
      if (bin(Family::Yline, {e, k, s}) > 0.5) p.repaired.push_back(e);
    }
    p.cost = period_cost(f, p.lcc, p.kcc);
    r.J += p.cost;
    r.periods.push_back(std::move(p));
  }
  return r;
}

// Name of the first constraint family whose removal makes the model
// feasible; empty when none does on its own.
inline std::string diagnose_infeasibility(const MipModel& m, double time_limit_s = 30.0) {
  auto family_of = [](const std::string& row) { return row.substr(0, row.find('[')); };
  std::vector<std::string> families;
  for (const auto& r : m.rows()) {
    const auto fam = family_of(r.name);
    if (std::find(families.begin(), families.end(), fam) == families.end()) families.push_back(fam);
  }
  std::vector<std::vector<std::pair<int, double>>> rows(m.num_rows());
  for (const auto& t : m.triplets()) rows[t.row].push_back({t.col, t.value});
  for (const auto& fam : families) {
    MipModel trial;
    for (const auto& c : m.columns()) trial.add_column(c.name, c.lb, c.ub, c.cost, c.integer);
    for (int r = 0; r < m.num_rows(); ++r) {
      if (family_of(m.row(r).name) == fam) continue;
      trial.add_row(m.row(r).name, rows[r], m.row(r).sense, m.row(r).rhs);
    }
    MipOptions opt;
    opt.time_limit_s = time_limit_s;
    opt.node_limit = 20000;
    opt.rel_gap = 1.0;
    const auto sol = solve_mip(trial, opt);
    if (sol.has_incumbent()) return fam;
  }
  return {};
}

inline void throw_for_status(const MipSolution& sol, const MipModel& m, const std::string& what) {
  if (sol.status == MipStatus::Infeasible) {
    const auto fam = diagnose_infeasibility(m);
    throw InfeasibleModel(what + " is infeasible" +
                          (fam.empty() ? std::string() : "; first violated constraint family: " + fam));
  }
  if (sol.status == MipStatus::Unbounded) throw InfeasibleModel(what + " is unbounded");
  if (!sol.has_incumbent()) {
    throw SolverLimit(what + ": " + to_string(sol.status) + " reached without an incumbent");
  }
}

inline SaaSolution solve_saa(const Feeder& f, const DerSpec& der, std::span<const FailureScenario> scenarios,
                             const ResourceLimits& limits, const MipOptions& opt = {},
                             const ModelOptions& mopt = {}) {
  SaaModel sm = build_saa_mip(f, der, scenarios, limits, mopt);
  SaaSolution out;
  out.limits = limits;
  out.stats = sm.model.stats();
  out.big_m = sm.model.big_m;
  out.warnings = sm.model.warnings;
  out.mip = solve_mip(sm.model, opt);
  throw_for_status(out.mip, sm.model, "SAA model");
  const auto& x = out.mip.x;
  out.allocation = extract_allocation(sm, f, x);
  out.objective = out.mip.objective;
  for (int i : sm.sites) out.site_cost += f.nodes[i].site_cost * out.allocation.ysc[i];
  for (int s = 0; s < static_cast<int>(sm.scenarios.size()); ++s) out.scenarios.push_back(extract_scenario(sm, f, x, s));
  return out;
}

// J(a, s): optimal second-stage cost of one scenario under a fixed allocation.
inline ScenarioResult evaluate_second_stage(const Allocation& a, const Feeder& f, const DerSpec& der,
                                            const FailureScenario& s, const ResourceLimits& limits,
                                            const MipOptions& opt = {}, const ModelOptions& mopt = {}) {
  SaaModel sm = build_second_stage(a, f, der, s, limits, mopt);
  const MipSolution sol = solve_mip(sm.model, opt);
  throw_for_status(sol, sm.model, "second-stage model");
  return extract_scenario(sm, f, sol.x, 0);
}

// Each scenario solved as its own deterministic two-stage problem, so every
// scenario gets its own allocation.
inline std::vector<ScenarioResult> solve_per_scenario(const Feeder& f, const DerSpec& der,
                                                      std::span<const FailureScenario> scenarios,
                                                      const ResourceLimits& limits, const MipOptions& opt = {},
                                                      int workers = 1) {
  std::vector<ScenarioResult> out(scenarios.size());
  parallel_for(scenarios.size(), workers, [&](std::size_t s) {
    const SaaSolution one = solve_saa(f, der, scenarios.subspan(s, 1), limits, opt);
    out[s] = one.scenarios.front();
  });
  return out;
}

// ------------------------------------------------------------- metrics --

// Mean over scenarios of 100 * (1 - c_k(s) / C_full).
inline double system_performance(std::span<const ScenarioResult> results, const Feeder& f, int k) {
  if (results.empty()) throw InvalidState("no scenario results");
  const double full = full_shed_cost(f);
  if (!(full > 0)) throw InvalidInput("feeder has no load costs; performance is undefined");
  double sum = 0.0;
  for (const auto& r : results) {
    if (!r.solved) throw InvalidState("scenario result is not solved");
    if (k < 0 || k >= static_cast<int>(r.periods.size())) throw InvalidInput("period out of range");
    sum += 100.0 * (1.0 - r.periods[k].cost / full);
  }
  return sum / static_cast<double>(results.size());
}

// Alternative normalization: mean over scenarios of 100 * (1 - J_s / sum C^LS).
inline double system_performance_total(std::span<const ScenarioResult> results, const Feeder& f) {
  if (results.empty()) throw InvalidState("no scenario results");
  double shed = 0.0;
  for (int i = 1; i < f.num_nodes(); ++i) shed += f.nodes[i].cost_shed;
  if (!(shed > 0)) throw InvalidInput("feeder has no shedding costs");
  double sum = 0.0;
  for (const auto& r : results) {
    if (!r.solved) throw InvalidState("scenario result is not solved");
    sum += 100.0 * (1.0 - r.J / shed);
  }
  return sum / static_cast<double>(results.size());
}

struct ResilienceSeries {
  std::vector<double> performance;  // k = 0..K
  int G = 0;
  int Y = 0;
  std::string track;
  std::uint64_t seed = 0;
};

inline ResilienceSeries resilience_curve(std::span<const ScenarioResult> results, const Feeder& f,
                                         const ResourceLimits& limits, std::string track = {},
                                         std::uint64_t seed = 0) {
  ResilienceSeries c;
  c.G = limits.G;
  c.Y = limits.Y;
  c.track = std::move(track);
  c.seed = seed;
  if (results.empty()) throw InvalidState("no scenario results");
  const int periods = static_cast<int>(results.front().periods.size());
  for (int k = 0; k < periods; ++k) c.performance.push_back(system_performance(results, f, k));
  return c;
}

// ---------------------------------------------------------- statistics --
struct FailureStats {
  double p_mean = 0.0, p_min = 0.0, p_max = 0.0;
  int n_samples = 0;
  std::vector<int> failures;                  // per sample
  std::vector<int> island_count;              // per sample
  std::map<int, int> failure_histogram;       // failures -> samples
  std::map<int, int> island_count_histogram;  // islands -> samples
  std::map<int, int> island_size_histogram;   // size -> islands (pooled over samples)
  double mean_failures = 0.0;
  double failures_std_error = 0.0;
  double island_size_median = 0.0;
  int island_size_min = 0;
  int island_size_max = 0;
};

// Samples are split into `workers` contiguous blocks; block b draws from
// rng.fork(b), so results depend on the worker count but not on scheduling.
inline FailureStats failure_statistics(const Feeder& f, std::span<const double> p, int n_samples, const Rng& rng,
                                       int workers = 1) {
  if (n_samples < 1) throw InvalidInput("n_samples must be >= 1");
  if (static_cast<int>(p.size()) != f.num_edges()) throw InvalidInput("one probability per edge is required");
  FailureStats st;
  st.n_samples = n_samples;
  if (!p.empty()) {
    st.p_mean = std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size());
    st.p_min = *std::min_element(p.begin(), p.end());
    st.p_max = *std::max_element(p.begin(), p.end());
    st.p_mean = std::clamp(st.p_mean, st.p_min, st.p_max);
  }
  st.failures.assign(n_samples, 0);
  st.island_count.assign(n_samples, 0);
  std::vector<std::vector<int>> sizes(n_samples);
  const int blocks = std::max(1, std::min(workers, n_samples));
  parallel_for(blocks, blocks, [&](std::size_t b) {
    Rng local = rng.fork(b);
    const int lo = static_cast<int>(static_cast<long>(n_samples) * static_cast<long>(b) / blocks);
    const int hi = static_cast<int>(static_cast<long>(n_samples) * static_cast<long>(b + 1) / blocks);
    for (int i = lo; i < hi; ++i) {
      const FailureScenario s = sample_scenario(p, local);
      st.failures[i] = s.num_failed();
      const auto isl = islands(f, failed_edges(s.failed));
      st.island_count[i] = static_cast<int>(isl.size());
      for (const auto& c : isl) sizes[i].push_back(static_cast<int>(c.size()));
    }
  });
  std::vector<int> pooled;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    ++st.failure_histogram[st.failures[i]];
    ++st.island_count_histogram[st.island_count[i]];
    sum += st.failures[i];
    sq += static_cast<double>(st.failures[i]) * st.failures[i];
    for (int z : sizes[i]) {
      ++st.island_size_histogram[z];
      pooled.push_back(z);
    }
  }
  st.mean_failures = sum / n_samples;
  if (n_samples > 1) {
    const double var = std::max(0.0, (sq - n_samples * st.mean_failures * st.mean_failures) / (n_samples - 1));
    st.failures_std_error = std::sqrt(var / n_samples);
  }
  if (!pooled.empty()) {
    std::sort(pooled.begin(), pooled.end());
    const std::size_t m = pooled.size();
    st.island_size_median = m % 2 ? pooled[m / 2] : 0.5 * (pooled[m / 2 - 1] + pooled[m / 2]);
    st.island_size_min = pooled.front();
    st.island_size_max = pooled.back();
  }
  return st;
}

// ------------------------------------------------------------ pipeline --
struct PipelineOptions {
  NhppParams nhpp;
  SelectionOptions sampling;
  std::uint64_t seed = 1;
  int G = 1;
  int Y = 1;
  std::optional<int> K;  // default: horizon_K of the selected scenarios
  MipOptions mip;
  bool per_scenario_a = false;
  int workers = 1;
};

struct PipelineResult {
  std::vector<LineIntensity> lines;
  std::vector<FailureScenario> scenarios;
  SaaSolution saa;
  std::vector<ScenarioResult> per_scenario;  // filled with per_scenario_a
  ResilienceSeries curve;
};

// Stream 0 of the master seed drives scenario selection.
inline std::vector<FailureScenario> select_for_pipeline(std::span<const double> p, const PipelineOptions& o) {
  Rng rng = Rng(o.seed).fork(0);
  return select_scenarios(p, rng, o.sampling);
}

inline PipelineResult plan_with_scenarios(const Feeder& f, const DerSpec& der, std::vector<FailureScenario> scenarios,
                                          const PipelineOptions& o, const std::string& track = {}) {
  PipelineResult r;
  r.scenarios = std::move(scenarios);
  ResourceLimits limits{o.G, o.Y, o.K ? *o.K : horizon_K(f, r.scenarios, o.Y)};
  r.saa = solve_saa(f, der, r.scenarios, limits, o.mip);
  if (o.per_scenario_a) {
    r.per_scenario = solve_per_scenario(f, der, r.scenarios, limits, o.mip, o.workers);
    r.curve = resilience_curve(r.per_scenario, f, limits, track, o.seed);
  } else {
    r.curve = resilience_curve(r.saa.scenarios, f, limits, track, o.seed);
  }
  return r;
}

inline PipelineResult run_pipeline(const Feeder& f, const DerSpec& der, const StormTrack& track, const Grid& grid,
                                   const PipelineOptions& o, const std::string& track_name = {}) {
  validate_feeder(f);
  const auto lines = failure_probabilities(f, track, grid, o.nhpp);
  const auto p = probabilities_of(lines);
  PipelineResult r = plan_with_scenarios(f, der, select_for_pipeline(p, o), o, track_name);
  r.lines = lines;
  return r;
}

struct SweepCell {
  int G = 0;
  int Y = 0;
  PipelineResult result;
};

// Solves every (G, Y) pair over one scenario set. Unless base.K is set, all
// cells share the horizon of the smallest Y so their objectives compare.
inline std::vector<SweepCell> sweep(const Feeder& f, const DerSpec& der, const std::vector<FailureScenario>& scenarios,
                                    const PipelineOptions& base, std::span<const int> Gs, std::span<const int> Ys,
                                    const std::string& track = {}) {
  if (Gs.empty() || Ys.empty()) return {};
  std::vector<SweepCell> cells;
  for (int G : Gs) {
    for (int Y : Ys) cells.push_back({G, Y, {}});
  }
  const int K = base.K ? *base.K : horizon_K(f, scenarios, *std::min_element(Ys.begin(), Ys.end()));
  parallel_for(cells.size(), base.workers, [&](std::size_t i) {
    PipelineOptions o = base;
    o.G = cells[i].G;
    o.Y = cells[i].Y;
    o.K = K;
    o.workers = 1;
    cells[i].result = plan_with_scenarios(f, der, scenarios, o, track);
  });
  return cells;
}

}  // namespace stormdn
