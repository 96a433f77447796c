#pragma once

// JSON readers/writers for tracks, grids, feeders, scenario sets and run
// configs, plus the CSV writer used for every tabular output.

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stormdn/error.hpp"
#include "stormdn/failure_model.hpp"
#include "stormdn/network_model.hpp"
#include "stormdn/stage2_model.hpp"
#include "stormdn/wind_field.hpp"

namespace stormdn {

using Json = nlohmann::json;

namespace detail {

inline Json parse_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidInput("cannot open " + path);
  try {
    return Json::parse(f);
  } catch (const Json::parse_error& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

template <typename T>
T field(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw InvalidInput(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw InvalidInput(where + ": field '" + key + "': " + e.what());
  }
}

inline const Json& array_field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw InvalidInput(where + ": missing field '" + key + "'");
  if (!j.at(key).is_array()) throw InvalidInput(where + ": field '" + key + "' must be an array");
  return j.at(key);
}

template <typename T>
T field_or(const Json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return field<T>(j, key, where);
}

}  // namespace detail

// ------------------------------------------------------------------ track --
inline StormTrack track_from_json(const Json& j, const std::string& where = "track") {
  using detail::field;
  StormTrack t;
  t.t1 = field<double>(j, "t1", where);
  t.t2 = field<double>(j, "t2", where);
  t.vm_mps = field<double>(j, "vm_mps", where);
  t.rm_km = field<double>(j, "rm_km", where);
  t.b = field<double>(j, "b", where);
  const Json& wps = detail::array_field(j, "waypoints", where);
  for (std::size_t i = 0; i < wps.size(); ++i) {
    const std::string w = where + ": waypoint " + std::to_string(i);
    t.waypoints.push_back({field<double>(wps[i], "t_h", w),
                           {field<double>(wps[i], "x_km", w), field<double>(wps[i], "y_km", w)}});
  }
  t.validate();
  return t;
}

inline StormTrack read_track(const std::string& path) { return track_from_json(detail::parse_json_file(path), path); }

inline std::string track_id(const std::string& path) {
  const Json j = detail::parse_json_file(path);
  return detail::field_or<std::string>(j, "id", std::filesystem::path(path).stem().string(), path);
}

// ------------------------------------------------------------------- grid --
inline Grid grid_from_json(const Json& j, const std::string& where = "grid") {
  using detail::field;
  const double side = detail::field_or<double>(j, "side_km", 1.0, where);
  std::vector<GridCell> cells;
  const Json& cs = detail::array_field(j, "cells", where);
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const std::string w = where + ": cell " + std::to_string(i);
    cells.push_back({field<int>(cs[i], "h", w), {field<double>(cs[i], "x_km", w), field<double>(cs[i], "y_km", w)}, side});
  }
  return Grid(side, std::move(cells));
}

inline Grid read_grid(const std::string& path) { return grid_from_json(detail::parse_json_file(path), path); }

// Rectangular nx-by-ny lattice with its lower-left corner at `origin`.
inline Grid make_grid(int nx, int ny, double side = 1.0, Point origin = {0.0, 0.0}) {
  std::vector<GridCell> cells;
  int h = 0;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      cells.push_back({h++, {origin.x + (ix + 0.5) * side, origin.y + (iy + 0.5) * side}, side});
    }
  }
  return Grid(side, std::move(cells));
}

// ----------------------------------------------------------------- feeder --
struct FeederFile {
  Feeder feeder;
  DerSpec der;
};

inline FeederFile feeder_from_json(const Json& j, const std::string& where = "feeder") {
  using detail::field;
  using detail::field_or;
  FeederFile out;
  Feeder& f = out.feeder;
  if (j.contains("base")) {
    f.s_base_mva = field_or<double>(j["base"], "s_mva", 1.0, where + ": base");
    f.v_base_kv = field_or<double>(j["base"], "v_kv", 1.0, where + ": base");
  }
  f.nu_nom = field_or<double>(j, "nu_nom", 1.0, where);
  const Json& nodes = detail::array_field(j, "nodes", where);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Json& n = nodes[i];
    const std::string w = where + ": node " + std::to_string(i);
    Node nd;
    nd.name = field<std::string>(n, "name", w);
    nd.location = {field_or<double>(n, "x_km", 0.0, w), field_or<double>(n, "y_km", 0.0, w)};
    nd.pc_max = field_or<double>(n, "pc_max", 0.0, w);
    nd.qc_max = field_or<double>(n, "qc_max", 0.0, w);
    nd.cost_shed = field_or<double>(n, "cost_shed", 0.0, w);
    nd.cost_control = field_or<double>(n, "cost_control", 0.0, w);
    nd.lcc_min = field_or<double>(n, "lcc_min", 0.0, w);
    nd.nu_min = field_or<double>(n, "nu_min", nd.nu_min, w);
    nd.nu_max = field_or<double>(n, "nu_max", nd.nu_max, w);
    nd.site = field_or<bool>(n, "site", false, w);
    nd.site_cost = field_or<double>(n, "site_cost", 0.0, w);
    f.nodes.push_back(nd);
  }
  if (f.nodes.empty() || f.nodes[0].name.empty()) throw InvalidInput(where + ": node list must start with the substation");
  const Json& edges = detail::array_field(j, "edges", where);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Json& ej = edges[e];
    const std::string w = where + ": edge " + std::to_string(e);
    Edge ed;
    const auto from = f.node_index(field<std::string>(ej, "from", w));
    const auto to = f.node_index(field<std::string>(ej, "to", w));
    if (!from || !to) throw InvalidInput(w + ": unknown endpoint");
    ed.from = *from;
    ed.to = *to;
    ed.r = field<double>(ej, "r", w);
    ed.x = field<double>(ej, "x", w);
    if (ej.contains("polyline")) {
      for (const auto& p : ej["polyline"]) ed.geometry.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    } else {
      ed.geometry = {f.nodes[ed.from].location, f.nodes[ed.to].location};
    }
    f.edges.push_back(std::move(ed));
  }
  if (j.contains("der")) {
    const Json& d = j["der"];
    out.der.count = field<int>(d, "count", where + ": der");
    out.der.pg_max = field<double>(d, "pg_max", where + ": der");
    out.der.pf_max = field<double>(d, "pf_max", where + ": der");
    out.der.kq = field<double>(d, "kq", where + ": der");
    out.der.nu_ref = field_or<double>(d, "nu_ref", 1.0, where + ": der");
    out.der.validate();
  }
  validate_feeder(f);
  return out;
}

inline FeederFile read_feeder(const std::string& path) {
  return feeder_from_json(detail::parse_json_file(path), path);
}

// ------------------------------------------------------------ scenario set --
struct ScenarioSet {
  std::uint64_t seed = 0;
  std::vector<double> p;
  std::vector<FailureScenario> scenarios;
};

inline Json to_json(const ScenarioSet& s) {
  Json j;
  j["seed"] = s.seed;
  j["p"] = s.p;
  j["scenarios"] = Json::array();
  for (const auto& sc : s.scenarios) {
    Json e;
    e["failed"] = std::vector<int>(sc.failed.begin(), sc.failed.end());
    e["prob"] = sc.prob;
    j["scenarios"].push_back(e);
  }
  return j;
}

inline ScenarioSet scenario_set_from_json(const Json& j, const std::string& where = "scenarios") {
  ScenarioSet s;
  s.seed = detail::field_or<std::uint64_t>(j, "seed", 0, where);
  s.p = detail::field_or<std::vector<double>>(j, "p", {}, where);
  for (const auto& e : detail::array_field(j, "scenarios", where)) {
    FailureScenario sc;
    for (int b : e.at("failed")) sc.failed.push_back(b ? 1 : 0);
    if (e.contains("prob")) {
      sc.prob = e["prob"].get<double>();
    } else if (s.p.size() == sc.failed.size()) {
      sc.prob = scenario_probability(sc.failed, s.p);
    }
    s.scenarios.push_back(std::move(sc));
  }
  return s;
}

inline ScenarioSet read_scenario_set(const std::string& path) {
  return scenario_set_from_json(detail::parse_json_file(path), path);
}

// ------------------------------------------------------------------ config --
struct SolverConfig {
  double rel_gap = 1e-6;
  double time_limit_s = kInf;
  long node_limit = 50'000'000;
  long log_every = 0;  // 0 disables the node log
};

struct RunConfig {
  std::string feeder;
  std::string track;
  std::string grid;
  std::string scenarios;  // optional pre-selected scenario set
  NhppParams nhpp;
  int G = 1;
  int Y = 1;
  std::optional<int> K;
  SelectionOptions sampling;
  std::uint64_t seed = 1;
  SolverConfig solver;
  int workers = 1;
  std::string out = "results";
};

inline RunConfig config_from_json(const Json& j, const std::filesystem::path& base, const std::string& where) {
  using detail::field_or;
  RunConfig c;
  auto path_of = [&](const char* key) -> std::string {
    const auto v = field_or<std::string>(j, key, "", where);
    if (v.empty()) return v;
    const std::filesystem::path p(v);
    return p.is_absolute() ? v : (base / p).lexically_normal().string();
  };
  c.feeder = path_of("feeder");
  c.track = path_of("track");
  c.grid = path_of("grid");
  c.scenarios = path_of("scenarios");
  if (j.contains("nhpp")) {
    const Json& n = j["nhpp"];
    c.nhpp.alpha = field_or<double>(n, "alpha", c.nhpp.alpha, where);
    c.nhpp.v_crit = field_or<double>(n, "v_crit", c.nhpp.v_crit, where);
    c.nhpp.lambda_norm = field_or<double>(n, "lambda_norm", c.nhpp.lambda_norm, where);
  }
  if (j.contains("limits")) {
    const Json& l = j["limits"];
    c.G = field_or<int>(l, "G", c.G, where);
    c.Y = field_or<int>(l, "Y", c.Y, where);
    if (l.contains("K") && !l["K"].is_null()) c.K = l["K"].get<int>();
  }
  if (j.contains("sampling")) {
    const Json& s = j["sampling"];
    c.sampling.n_samples = field_or<int>(s, "n_samples", c.sampling.n_samples, where);
    c.sampling.top = field_or<int>(s, "top", c.sampling.top, where);
    c.sampling.subset_size = field_or<int>(s, "subset_size", c.sampling.subset_size, where);
    c.seed = field_or<std::uint64_t>(s, "seed", c.seed, where);
  }
  if (j.contains("solver")) {
    const Json& s = j["solver"];
    c.solver.rel_gap = field_or<double>(s, "rel_gap", c.solver.rel_gap, where);
    c.solver.time_limit_s = field_or<double>(s, "time_limit_s", c.solver.time_limit_s, where);
    c.solver.node_limit = field_or<long>(s, "node_limit", c.solver.node_limit, where);
    c.solver.log_every = field_or<long>(s, "log_every", c.solver.log_every, where);
  }
  c.workers = field_or<int>(j, "workers", c.workers, where);
  c.out = field_or<std::string>(j, "out", c.out, where);
  return c;
}

inline RunConfig read_config(const std::string& path) {
  return config_from_json(detail::parse_json_file(path), std::filesystem::path(path).parent_path(), path);
}

// -------------------------------------------------------------------- csv --
inline std::string fmt_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Writes `# seed=<seed>, generated=<UTC timestamp>`, then a header row.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, std::uint64_t seed, const std::vector<std::string>& header) : os_(os) {
    const std::time_t now = std::time(nullptr);
    char ts[32];
    std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    os_ << "# seed=" << seed << ", generated=" << ts << '\n';
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os_ << ',';
      os_ << cells[i];
    }
    os_ << '\n';
  }

 private:
  std::ostream& os_;
};

}  // namespace stormdn
