#pragma once

// Radial feeder representation, validation, line/grid geometry and island
// decomposition.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "stormdn/error.hpp"
#include "stormdn/wind_field.hpp"

namespace stormdn {

struct Node {
  std::string name;
  double pc_max = 0.0;        // p.u.
  double qc_max = 0.0;        // p.u.
  double cost_shed = 0.0;     // C^LS
  double cost_control = 0.0;  // C^LC
  double lcc_min = 0.0;
  double nu_min = 0.9;  // squared voltage, p.u.
  double nu_max = 1.1;
  bool site = false;       // candidate DER site
  double site_cost = 0.0;  // C^SD
  Point location;
};

struct Edge {
  int from = 0;
  int to = 0;
  double r = 0.0;  // p.u.
  double x = 0.0;  // p.u.
  std::vector<Point> geometry;  // polyline, km

  double length_km() const {
    double len = 0.0;
    for (std::size_t i = 1; i < geometry.size(); ++i) len += distance(geometry[i - 1], geometry[i]);
    return len;
  }
};

struct DerSpec {
  int count = 0;        // |D|
  double pg_max = 0.0;  // rating per unit, p.u.
  double pf_max = 0.0;  // tan(arccos(max power factor))
  double kq = 0.0;      // droop coefficient
  double nu_ref = 1.0;  // idle terminal voltage setpoint

  void validate() const {
    std::vector<std::string> bad;
    if (count < 0) bad.push_back("der.count must be >= 0");
    if (!(pg_max > 0)) bad.push_back("der.pg_max must be > 0");
    if (!(pf_max >= 0)) bad.push_back("der.pf_max must be >= 0");
    if (!(kq > 0)) bad.push_back("der.kq must be > 0");
    if (!bad.empty()) throw ValidationError(std::move(bad));
  }
};

// Node 0 is the substation. Edges point away from it.
struct Feeder {
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  double nu_nom = 1.0;
  double s_base_mva = 1.0;
  double v_base_kv = 1.0;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }

  // Edge leaving the substation. Valid only on a validated feeder.
  int substation_edge() const {
    for (int e = 0; e < num_edges(); ++e) {
      if (edges[e].from == 0) return e;
    }
    throw InvalidState("feeder has no substation edge");
  }

  std::vector<int> sites() const {
    std::vector<int> u;
    for (int i = 1; i < num_nodes(); ++i) {
      if (nodes[i].site) u.push_back(i);
    }
    return u;
  }

  std::vector<std::vector<int>> children_edges() const {
    std::vector<std::vector<int>> out(nodes.size());
    for (int e = 0; e < num_edges(); ++e) out[edges[e].from].push_back(e);
    return out;
  }

  std::optional<int> node_index(const std::string& name) const {
    for (int i = 0; i < num_nodes(); ++i) {
      if (nodes[i].name == name) return i;
    }
    return std::nullopt;
  }

  std::string edge_label(int e) const {
    return "(" + nodes[edges[e].from].name + "," + nodes[edges[e].to].name + ")";
  }

  double total_pc() const {
    double s = 0;
    for (const auto& n : nodes) s += n.pc_max;
    return s;
  }
  double total_qc() const {
    double s = 0;
    for (const auto& n : nodes) s += n.qc_max;
    return s;
  }
};

namespace detail {

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

}  // namespace detail

// Checks every feeder invariant and throws a ValidationError listing all of
// the violations found.
inline const Feeder& validate_feeder(const Feeder& f) {
  std::vector<std::string> bad;
  const int n = f.num_nodes();
  if (n < 2) bad.push_back("feeder needs the substation and at least one node");

  int substation_edges = 0;
  std::vector<int> in_degree(std::max(n, 0), 0);
  detail::DisjointSets sets(std::max(n, 0));
  for (int e = 0; e < f.num_edges(); ++e) {
    const Edge& ed = f.edges[e];
    const std::string tag = "edge " + std::to_string(e);
    if (ed.from < 0 || ed.from >= n || ed.to < 0 || ed.to >= n) {
      bad.push_back(tag + ": endpoint out of range");
      continue;
    }
    if (ed.from == ed.to) bad.push_back(tag + ": self loop");
    if (!(ed.r > 0)) bad.push_back(tag + " " + f.edge_label(e) + ": resistance must be > 0");
    if (!(ed.x > 0)) bad.push_back(tag + " " + f.edge_label(e) + ": reactance must be > 0");
    if (ed.from == 0) ++substation_edges;
    ++in_degree[ed.to];
    if (!sets.unite(ed.from, ed.to)) bad.push_back(tag + " " + f.edge_label(e) + ": cycle detected");
  }
  if (substation_edges != 1) {
    bad.push_back("exactly one edge must leave the substation (found " +
                  std::to_string(substation_edges) + ")");
  }
  for (int i = 0; i < n; ++i) {
    if (i == 0 && in_degree[0] > 0) {
      bad.push_back("wrong edge orientation: an edge points into the substation");
    } else if (i > 0 && in_degree[i] > 1) {
      bad.push_back("wrong edge orientation: node " + f.nodes[i].name + " has " +
                    std::to_string(in_degree[i]) + " parents");
    }
    if (sets.find(i) != sets.find(0)) {
      bad.push_back("disconnected node " + f.nodes[i].name);
    }
  }
  for (int i = 1; i < n; ++i) {
    const Node& nd = f.nodes[i];
    if (nd.lcc_min < 0 || nd.lcc_min > 1) bad.push_back("node " + nd.name + ": lcc_min outside [0,1]");
    if (!(nd.nu_min < f.nu_nom && f.nu_nom < nd.nu_max)) {
      bad.push_back("node " + nd.name + ": need nu_min < nu_nom < nu_max");
    }
    if (nd.pc_max < 0 || nd.qc_max < 0) bad.push_back("node " + nd.name + ": negative demand");
    if (nd.site_cost < 0) bad.push_back("node " + nd.name + ": negative site cost");
  }
  if (n >= 1 && f.nodes[0].site) bad.push_back("the substation cannot be a DER site");
  if (!bad.empty()) throw ValidationError(std::move(bad));
  return f;
}

// Regular lattice of square cells with a common side length.
class Grid {
 public:
  Grid() = default;
  Grid(double side_km, std::vector<GridCell> cells) : side_(side_km), cells_(std::move(cells)) {
    if (!(side_ > 0)) throw InvalidInput("grid side must be > 0");
    if (cells_.empty()) throw InvalidInput("grid has no cells");
    origin_ = {cells_.front().center.x - side_ / 2, cells_.front().center.y - side_ / 2};
    std::set<int> ids;
    for (auto& c : cells_) {
      c.side = side_;
      if (!ids.insert(c.h).second) throw InvalidInput("duplicate grid cell id " + std::to_string(c.h));
      const double fx = (c.center.x - side_ / 2 - origin_.x) / side_;
      const double fy = (c.center.y - side_ / 2 - origin_.y) / side_;
      const long ix = std::lround(fx);
      const long iy = std::lround(fy);
      if (std::abs(fx - ix) > 1e-9 || std::abs(fy - iy) > 1e-9) {
        throw InvalidInput("grid cell " + std::to_string(c.h) + " is off the lattice");
      }
      lattice_[{ix, iy}] = c.h;
      xs_.insert(ix);
      xs_.insert(ix + 1);
      ys_.insert(iy);
      ys_.insert(iy + 1);
    }
  }

  double side() const { return side_; }
  std::span<const GridCell> cells() const { return cells_; }

  // Cell containing p under the half-open convention [x0, x0 + side).
  std::optional<int> cell_at(Point p) const {
    const long ix = static_cast<long>(std::floor((p.x - origin_.x) / side_ + 1e-12));
    const long iy = static_cast<long>(std::floor((p.y - origin_.y) / side_ + 1e-12));
    auto it = lattice_.find({ix, iy});
    if (it == lattice_.end()) return std::nullopt;
    return it->second;
  }

  // Lattice line coordinates (km) crossing the x and y axes.
  std::vector<double> x_lines() const { return lines(xs_, origin_.x); }
  std::vector<double> y_lines() const { return lines(ys_, origin_.y); }

 private:
  std::vector<double> lines(const std::set<long>& idx, double o) const {
    std::vector<double> v;
    for (long i : idx) v.push_back(o + static_cast<double>(i) * side_);
    return v;
  }

  double side_ = 1.0;
  Point origin_;
  std::vector<GridCell> cells_;
  std::map<std::pair<long, long>, int> lattice_;
  std::set<long> xs_, ys_;
};

// Length of the polyline inside each grid cell. Each segment is split at
// every lattice line it crosses, and each piece is assigned to the cell that
// holds its midpoint.
inline std::map<int, double> line_cell_lengths(std::span<const Point> polyline, const Grid& grid) {
  std::map<int, double> out;
  const auto xl = grid.x_lines();
  const auto yl = grid.y_lines();
  for (std::size_t s = 1; s < polyline.size(); ++s) {
    const Point a = polyline[s - 1];
    const Point b = polyline[s];
    const double len = distance(a, b);
    if (len == 0.0) continue;
    std::vector<double> cuts{0.0, 1.0};
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    if (dx != 0.0) {
      for (double x : xl) {
        const double t = (x - a.x) / dx;
        if (t > 0.0 && t < 1.0) cuts.push_back(t);
      }
    }
    if (dy != 0.0) {
      for (double y : yl) {
        const double t = (y - a.y) / dy;
        if (t > 0.0 && t < 1.0) cuts.push_back(t);
      }
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 1; i < cuts.size(); ++i) {
      const double t0 = cuts[i - 1];
      const double t1 = cuts[i];
      if (t1 - t0 <= 0.0) continue;
      const double tm = 0.5 * (t0 + t1);
      const Point mid{a.x + tm * dx, a.y + tm * dy};
      const auto cell = grid.cell_at(mid);
      if (!cell) {
        throw OutOfRange("line geometry leaves the grid near (" + std::to_string(mid.x) + ", " +
                         std::to_string(mid.y) + ") km");
      }
      out[*cell] += (t1 - t0) * len;
    }
  }
  return out;
}

// Connected components after removing the failed edges and the substation
// edge. Components containing the substation are dropped. Each island is a
// sorted node list; islands are ordered by their smallest node.
inline std::vector<std::vector<int>> islands(const Feeder& f, std::span<const int> failed) {
  std::vector<bool> cut(f.edges.size(), false);
  for (int e : failed) {
    if (e < 0 || e >= f.num_edges()) throw InvalidInput("unknown edge id " + std::to_string(e));
    cut[e] = true;
  }
  cut[f.substation_edge()] = true;
  detail::DisjointSets sets(f.num_nodes());
  for (int e = 0; e < f.num_edges(); ++e) {
    if (!cut[e]) sets.unite(f.edges[e].from, f.edges[e].to);
  }
  std::map<int, std::vector<int>> comps;
  for (int i = 0; i < f.num_nodes(); ++i) comps[sets.find(i)].push_back(i);
  std::vector<std::vector<int>> out;
  const int root = sets.find(0);
  for (auto& [rep, members] : comps) {
    if (rep != root) out.push_back(std::move(members));
  }
  return out;
}

// Failed-edge list for a binary scenario vector.
inline std::vector<int> failed_edges(std::span<const unsigned char> s) {
  std::vector<int> out;
  for (std::size_t e = 0; e < s.size(); ++e) {
    if (s[e]) out.push_back(static_cast<int>(e));
  }
  return out;
}

}  // namespace stormdn
