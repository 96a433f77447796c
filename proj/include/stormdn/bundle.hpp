#pragma once

// Results bundle: allocation, per-scenario schedules and dispatch, the
// resilience curve and a plain-text report, all under one directory.

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "stormdn/io.hpp"
#include "stormdn/saa.hpp"

namespace stormdn {

struct RunInfo {
  std::uint64_t seed = 0;
  std::string feeder;
  std::string track;
  NhppParams nhpp;
  SelectionOptions sampling;
  std::vector<double> p;  // per-edge failure probability, when computed
  int workers = 1;
};

inline void write_allocation_csv(std::ostream& os, const Allocation& a, const Feeder& f, std::uint64_t seed) {
  CsvWriter w(os, seed, {"node", "name", "site", "developed", "ders", "site_cost"});
  for (int i = 1; i < f.num_nodes(); ++i) {
    if (!f.nodes[i].site) continue;
    std::string ders;
    for (std::size_t d = 0; d < a.ygc[i].size(); ++d) {
      if (!a.ygc[i][d]) continue;
      if (!ders.empty()) ders += ';';
      ders += std::to_string(d);
    }
    w.row({std::to_string(i), f.nodes[i].name, "1", std::to_string(a.ysc[i]), ders, fmt_num(f.nodes[i].site_cost)});
  }
}

inline void write_schedule_csv(std::ostream& os, const ScenarioResult& r, const Feeder& f, std::uint64_t seed) {
  CsvWriter w(os, seed, {"k", "edge", "from", "to", "repaired", "down"});
  std::vector<int> tracked;
  const int sub = f.substation_edge();
  for (int e = 0; e < f.num_edges(); ++e) {
    if (r.scenario.failed[e] || e == sub) tracked.push_back(e);
  }
  for (std::size_t k = 0; k < r.periods.size(); ++k) {
    const auto& p = r.periods[k];
    for (int e : tracked) {
      const bool rep = std::find(p.repaired.begin(), p.repaired.end(), e) != p.repaired.end();
      w.row({std::to_string(k), std::to_string(e), f.nodes[f.edges[e].from].name, f.nodes[f.edges[e].to].name,
             rep ? "1" : "0", std::to_string(p.down[e])});
    }
  }
}

// Long format: one quantity per row.
inline void write_dispatch_csv(std::ostream& os, const ScenarioResult& r, const Feeder& f, std::uint64_t seed) {
  CsvWriter w(os, seed, {"k", "element", "index", "name", "quantity", "value"});
  for (std::size_t k = 0; k < r.periods.size(); ++k) {
    const auto& p = r.periods[k];
    const std::string ks = std::to_string(k);
    for (int i = 0; i < f.num_nodes(); ++i) {
      const std::string is = std::to_string(i);
      const std::string& nm = f.nodes[i].name;
      auto node = [&](const char* q, double v) { w.row({ks, "node", is, nm, q, fmt_num(v)}); };
      node("nu", p.nu[i]);
      if (i == 0) continue;
      node("lcc", p.lcc[i]);
      node("kcc", p.kcc[i]);
      node("pc", p.pc[i]);
      node("qc", p.qc[i]);
      node("pt", p.pt[i]);
      node("qt", p.qt[i]);
      for (std::size_t d = 0; d < p.pg[i].size(); ++d) {
        if (!r.allocation.ygc[i][d]) continue;
        const std::string ds = std::to_string(d);
        w.row({ks, "der", ds, nm, "pg", fmt_num(p.pg[i][d])});
        w.row({ks, "der", ds, nm, "qg", fmt_num(p.qg[i][d])});
      }
    }
    for (int e = 0; e < f.num_edges(); ++e) {
      const std::string es = std::to_string(e);
      const std::string nm = f.edge_label(e);
      w.row({ks, "edge", es, nm, "P", fmt_num(p.P[e])});
      w.row({ks, "edge", es, nm, "Q", fmt_num(p.Q[e])});
      w.row({ks, "edge", es, nm, "down", std::to_string(p.down[e])});
    }
    w.row({ks, "period", "", "", "cost", fmt_num(p.cost)});
  }
}

inline void write_curve_csv(std::ostream& os, const ResilienceSeries& c) {
  CsvWriter w(os, c.seed, {"k", "performance", "G", "Y", "track"});
  for (std::size_t k = 0; k < c.performance.size(); ++k) {
    w.row({std::to_string(k), fmt_num(c.performance[k]), std::to_string(c.G), std::to_string(c.Y), c.track});
  }
}

inline void write_report(std::ostream& os, const PipelineResult& r, const Feeder& f, const RunInfo& info) {
  const SaaSolution& s = r.saa;
  os << "seed = " << info.seed << '\n';
  os << "feeder = " << info.feeder << '\n';
  os << "track = " << info.track << '\n';
  os << "nhpp = alpha " << fmt_num(info.nhpp.alpha) << ", v_crit " << fmt_num(info.nhpp.v_crit) << ", lambda_norm "
     << fmt_num(info.nhpp.lambda_norm) << '\n';
  os << "sampling = n_samples " << info.sampling.n_samples << ", top " << info.sampling.top << ", subset_size "
     << info.sampling.subset_size << '\n';
  os << "workers = " << info.workers << '\n';
  os << "limits = G " << s.limits.G << ", Y " << s.limits.Y << ", K " << s.limits.K << '\n';
  os << "model = rows " << s.stats.rows << ", columns " << s.stats.columns << ", binaries " << s.stats.binaries
     << ", nonzeros " << s.stats.nonzeros << '\n';
  for (const auto& [k, v] : s.big_m) os << "big_m " << k << " = " << fmt_num(v) << '\n';
  os << "solver = status " << to_string(s.mip.status) << ", objective " << fmt_num(s.mip.objective) << ", bound "
     << fmt_num(s.mip.best_bound) << ", gap " << fmt_num(s.mip.gap) << ", nodes " << s.mip.nodes
     << ", lp_iterations " << s.mip.lp_iterations << ", wall_s " << fmt_num(s.mip.wall_time_s) << '\n';
  os << "objective = " << fmt_num(s.objective) << '\n';
  os << "site_cost = " << fmt_num(s.site_cost) << '\n';
  for (std::size_t i = 0; i < s.scenarios.size(); ++i) {
    const auto& sc = s.scenarios[i];
    std::string failed;
    for (int e = 0; e < f.num_edges(); ++e) {
      if (sc.scenario.failed[e]) failed += (failed.empty() ? "" : " ") + f.edge_label(e);
    }
    os << "scenario " << i << " = prob " << fmt_num(sc.scenario.prob) << ", J " << fmt_num(sc.J) << ", failed ["
       << failed << "]\n";
  }
  for (std::size_t e = 0; e < info.p.size(); ++e) {
    os << "p " << f.edge_label(static_cast<int>(e)) << " = " << fmt_num(info.p[e]) << '\n';
  }
  const auto& base = r.per_scenario.empty() ? s.scenarios : r.per_scenario;
  os << "curve_allocation = " << (r.per_scenario.empty() ? "saa" : "per-scenario") << '\n';
  os << "performance_total = " << fmt_num(system_performance_total(base, f)) << '\n';
  for (const auto& wmsg : s.warnings) os << "warning = " << wmsg << '\n';
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p);
  if (!f) throw InvalidInput("cannot write " + p.string());
  return f;
}

inline void write_bundle(const std::filesystem::path& dir, const PipelineResult& r, const Feeder& f,
                         const RunInfo& info) {
  std::filesystem::create_directories(dir);
  {
    auto os = open_out(dir / "allocation.csv");
    write_allocation_csv(os, r.saa.allocation, f, info.seed);
  }
  const auto& results = r.per_scenario.empty() ? r.saa.scenarios : r.per_scenario;
  for (std::size_t s = 0; s < results.size(); ++s) {
    auto sch = open_out(dir / ("schedule_" + std::to_string(s) + ".csv"));
    write_schedule_csv(sch, results[s], f, info.seed);
    auto dis = open_out(dir / ("dispatch_" + std::to_string(s) + ".csv"));
    write_dispatch_csv(dis, results[s], f, info.seed);
  }
  {
    auto os = open_out(dir / "curve.csv");
    write_curve_csv(os, r.curve);
  }
  {
    auto os = open_out(dir / "report.txt");
    write_report(os, r, f, info);
  }
  {
    ScenarioSet set{info.seed, info.p, r.scenarios};
    auto os = open_out(dir / "scenarios.json");
    os << to_json(set).dump(2) << '\n';
  }
}

}  // namespace stormdn
