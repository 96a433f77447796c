#pragma once

// LP-based branch-and-bound over the integer columns of a MipModel.
//
// Node selection is best-bound with depth-first dives: after branching both
// children are solved, the dive continues into the one with the lower bound
// and the sibling is queued with its basis. When a dive ends the open node
// with the lowest bound is taken next, ties going to the newest node. Branching picks
// the most fractional integer column, ties going to the lowest index. The run
// is deterministic for identical input.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <optional>
#include <ostream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "stormdn/error.hpp"
#include "stormdn/mip_model.hpp"
#include "stormdn/simplex.hpp"

namespace stormdn {

enum class MipStatus { Optimal, Infeasible, Unbounded, NodeLimit, TimeLimit };

inline const char* to_string(MipStatus s) {
  switch (s) {
    case MipStatus::Optimal: return "optimal";
    case MipStatus::Infeasible: return "infeasible";
    case MipStatus::Unbounded: return "unbounded";
    case MipStatus::NodeLimit: return "node-limit";
    case MipStatus::TimeLimit: return "time-limit";
  }
  return "?";
}

struct MipOptions {
  double int_tol = 1e-6;
  double rel_gap = 1e-6;
  long node_limit = 50'000'000;
  double time_limit_s = kInf;
  double cutoff = kInf;  // nodes whose bound reaches this are discarded
  std::ostream* log = nullptr;  // line-oriented progress log
  long log_every = 1000;
  bool record_node_bounds = false;
  SimplexOptions lp;
};

struct MipSolution {
  MipStatus status = MipStatus::Infeasible;
  double objective = kInf;   // incumbent
  double best_bound = -kInf;
  double gap = kInf;
  std::vector<double> x;
  long nodes = 0;
  long lp_iterations = 0;
  double wall_time_s = 0.0;
  std::vector<double> node_lp_objectives;  // filled when record_node_bounds

  bool has_incumbent() const { return !x.empty(); }
};

inline double relative_gap(double incumbent, double bound) {
  if (!std::isfinite(incumbent)) return kInf;
  if (!std::isfinite(bound)) return kInf;
  return std::max(0.0, incumbent - bound) / std::max(1.0, std::abs(incumbent));
}

namespace detail {

struct BoundChange {
  int col = 0;
  double lb = 0.0;
  double ub = 0.0;
};

struct BbNode {
  long id = 0;
  double bound = -kInf;
  std::vector<BoundChange> changes;
  std::shared_ptr<const BasisDescriptor> basis;
};

class OpenNodes {
 public:
  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return nodes_.size(); }

  void push(BbNode n) {
    by_bound_.insert({n.bound, -n.id});
    const long id = n.id;
    nodes_.emplace(id, std::move(n));
  }

  double best_bound() const { return by_bound_.empty() ? kInf : by_bound_.begin()->first; }

  BbNode pop_best() { return take(-by_bound_.begin()->second); }
  BbNode pop_newest() { return take(nodes_.rbegin()->first); }

  // Drops every node whose bound is at or above the cutoff.
  void prune(double cutoff) {
    while (!by_bound_.empty() && std::prev(by_bound_.end())->first >= cutoff) {
      take(-std::prev(by_bound_.end())->second);
    }
  }

 private:
  BbNode take(long id) {
    auto it = nodes_.find(id);
    BbNode n = std::move(it->second);
    nodes_.erase(it);
    by_bound_.erase({n.bound, -n.id});
    return n;
  }

  std::map<long, BbNode> nodes_;
  std::set<std::pair<double, long>> by_bound_;
};

}  // namespace detail

inline MipSolution solve_mip(const MipModel& model, const MipOptions& opt = {}) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };

  MipSolution out;
  SimplexSolver lp(model, opt.lp);
  std::vector<int> int_cols;
  for (int j = 0; j < model.num_columns(); ++j) {
    if (model.column(j).integer) int_cols.push_back(j);
  }

  double incumbent = kInf;
  auto cutoff = [&] {
    if (!std::isfinite(incumbent)) return opt.cutoff;
    return std::min(opt.cutoff, incumbent - opt.rel_gap * std::max(1.0, std::abs(incumbent)));
  };

  auto log_line = [&](long open, double bound) {
    if (!opt.log) return;
    char buf[256];
    std::snprintf(buf, sizeof buf, "node=%ld open=%ld bound=%.10g incumbent=%.10g gap=%.3e time=%.2f\n",
                  out.nodes, open, bound, incumbent, relative_gap(incumbent, bound), elapsed());
    *opt.log << buf;
  };

  auto apply = [&](const std::vector<detail::BoundChange>& changes) {
    lp.reset_bounds();
    for (const auto& c : changes) {
      if (!lp.set_column_bounds(c.col, c.lb, c.ub)) return false;
    }
    return true;
  };

  // Fixes the integers at their rounded values and re-solves for the
  // continuous part, so the incumbent satisfies the rows exactly.
  auto try_incumbent = [&](const std::vector<double>& x, const std::vector<detail::BoundChange>& changes) {
    const auto saved = lp.basis();
    lp.reset_bounds();
    bool ok = true;
    for (int j : int_cols) ok = ok && lp.set_column_bounds(j, std::round(x[j]), std::round(x[j]));
    if (ok) {
      auto pol = lp.solve();
      out.lp_iterations += pol.iterations;
      if (pol.status == LpStatus::Optimal && pol.objective < incumbent) {
        for (int j : int_cols) pol.x[j] = std::round(pol.x[j]);
        incumbent = pol.objective;
        out.x = std::move(pol.x);
      }
    }
    apply(changes);
    lp.set_basis(saved);
  };

  auto note_node = [&](const LpSolution& sol) {
    ++out.nodes;
    out.lp_iterations += sol.iterations;
    if (opt.record_node_bounds && sol.status == LpStatus::Optimal) {
      out.node_lp_objectives.push_back(sol.objective);
    }
    if (sol.status == LpStatus::Unbounded) throw NumericalFailure("unbounded LP below a bounded root");
  };

  struct Evaluated {
    detail::BbNode node;
    LpSolution sol;
  };

  detail::OpenNodes open;
  long next_id = 1;
  long next_log = std::max(1L, opt.log_every);
  std::optional<Evaluated> current;
  MipStatus limit_status = MipStatus::Optimal;
  bool limit_hit = false;

  {
    LpSolution root = lp.solve();
    ++out.nodes;
    out.lp_iterations += root.iterations;
    if (opt.record_node_bounds && root.status == LpStatus::Optimal) out.node_lp_objectives.push_back(root.objective);
    if (root.status != LpStatus::Optimal) {
      out.status = root.status == LpStatus::Unbounded ? MipStatus::Unbounded : MipStatus::Infeasible;
      out.wall_time_s = elapsed();
      return out;
    }
    out.best_bound = root.objective;
    current = Evaluated{detail::BbNode{0, root.objective, {}, nullptr}, std::move(root)};
  }

  while (true) {
    if (out.nodes >= opt.node_limit) {
      limit_hit = true;
      limit_status = MipStatus::NodeLimit;
      break;
    }
    if (elapsed() > opt.time_limit_s) {
      limit_hit = true;
      limit_status = MipStatus::TimeLimit;
      break;
    }
    if (!current) {
      open.prune(cutoff());
      if (open.empty()) break;
      if (std::isfinite(incumbent) && relative_gap(incumbent, open.best_bound()) <= opt.rel_gap) break;
      detail::BbNode n = open.pop_best();
      if (!apply(n.changes)) continue;
      lp.set_basis(*n.basis);
      LpSolution sol = lp.solve(cutoff());
      out.lp_iterations += sol.iterations;
      if (sol.status != LpStatus::Optimal || sol.objective >= cutoff()) continue;
      current = Evaluated{std::move(n), std::move(sol)};
    }
    Evaluated cur = std::move(*current);
    current.reset();
    if (cur.sol.objective >= cutoff()) continue;

    int branch = -1;
    double best_frac = 0.0;
    for (int j : int_cols) {
      const double f = cur.sol.x[j] - std::floor(cur.sol.x[j]);
      const double dist = std::min(f, 1.0 - f);
      if (dist <= opt.int_tol) continue;
      if (dist > best_frac + 1e-12) {
        best_frac = dist;
        branch = j;
      }
    }
    if (branch < 0) {
      try_incumbent(cur.sol.x, cur.node.changes);
      continue;
    }

    // Both children are solved from the parent's basis; the dive continues
    // into the one with the lower bound (rounding side on ties) and the other
    // is queued with its own basis.
    const double v = cur.sol.x[branch];
    const auto parent_basis = cur.sol.basis;
    const bool up_first = v - std::floor(v) >= 0.5;
    Evaluated kids[2];
    bool live[2] = {false, false};
    for (int c = 0; c < 2; ++c) {
      const bool up = (c == 0) == up_first;
      kids[c].node = detail::BbNode{next_id++, cur.sol.objective, cur.node.changes, nullptr};
      kids[c].node.changes.push_back(up ? detail::BoundChange{branch, std::ceil(v), kInf}
                                        : detail::BoundChange{branch, -kInf, std::floor(v)});
      if (!apply(kids[c].node.changes)) continue;
      lp.set_basis(parent_basis);
      kids[c].sol = lp.solve(cutoff());
      note_node(kids[c].sol);
      live[c] = kids[c].sol.status == LpStatus::Optimal && kids[c].sol.objective < cutoff();
      if (live[c]) kids[c].node.bound = std::max(cur.sol.objective, kids[c].sol.objective);
    }
    if (opt.log && out.nodes >= next_log) {
      next_log += std::max(1L, opt.log_every);
      log_line(static_cast<long>(open.size()), std::min(cur.node.bound, open.best_bound()));
    }
    int dive = -1;
    if (live[0] && live[1]) {
      dive = kids[1].node.bound < kids[0].node.bound ? 1 : 0;
    } else if (live[0] || live[1]) {
      dive = live[0] ? 0 : 1;
    }
    for (int c = 0; c < 2; ++c) {
      if (!live[c]) continue;
      if (c == dive) {
        current = std::move(kids[c]);
      } else {
        kids[c].node.basis = std::make_shared<const BasisDescriptor>(kids[c].sol.basis);
        open.push(std::move(kids[c].node));
      }
    }
  }

  out.objective = incumbent;
  double bound = incumbent;
  if (limit_hit && current) bound = std::min(bound, current->node.bound);
  bound = std::min(bound, open.best_bound());
  out.best_bound = std::isfinite(bound) ? bound : out.best_bound;
  out.gap = relative_gap(incumbent, out.best_bound);
  if (!std::isfinite(incumbent)) {
    out.status = limit_hit ? limit_status : MipStatus::Infeasible;
  } else if (limit_hit && out.gap > opt.rel_gap) {
    out.status = limit_status;
  } else {
    out.status = MipStatus::Optimal;
  }
  out.wall_time_s = elapsed();
  log_line(0, out.best_bound);
  return out;
}

}  // namespace stormdn
