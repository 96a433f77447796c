#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance binary.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "stormdn/mip_model.hpp"
#include "stormdn/simplex.hpp"

namespace stormdn::oracle {

struct Enumeration {
  double best = kInf;
  std::vector<double> x;
  long assignments = 0;  // integer assignments passing the pure-integer rows
  long lp_solves = 0;
};

// Walks every 0/1 assignment of the integer columns (which must be binary or
// fixed). Rows made of integer columns only are checked as soon as their
// last column is set; each surviving assignment is completed by an LP over
// the continuous columns.
inline Enumeration enumerate_binaries(const MipModel& m) {
  std::vector<int> ints;
  for (int c = 0; c < m.num_columns(); ++c) {
    if (m.column(c).integer) ints.push_back(c);
  }
  std::vector<int> pos(m.num_columns(), -1);
  for (int i = 0; i < static_cast<int>(ints.size()); ++i) pos[ints[i]] = i;

  std::vector<std::vector<std::pair<int, double>>> row_terms(m.num_rows());
  std::vector<int> last(m.num_rows(), -1);
  std::vector<char> pure(m.num_rows(), 1);
  for (const auto& t : m.triplets()) {
    row_terms[t.row].push_back({t.col, t.value});
    if (pos[t.col] < 0) pure[t.row] = 0;
    else last[t.row] = std::max(last[t.row], pos[t.col]);
  }
  std::vector<std::vector<int>> check_at(ints.size());
  for (int r = 0; r < m.num_rows(); ++r) {
    if (pure[r] && last[r] >= 0) check_at[last[r]].push_back(r);
  }

  Enumeration out;
  std::vector<double> val(m.num_columns(), 0.0);
  auto row_ok = [&](int r) {
    double a = 0;
    for (auto [c, v] : row_terms[r]) a += v * val[c];
    const double rhs = m.row(r).rhs;
    switch (m.row(r).sense) {
      case Sense::LessEqual: return a <= rhs + 1e-9;
      case Sense::GreaterEqual: return a >= rhs - 1e-9;
      case Sense::Equal: return std::abs(a - rhs) <= 1e-9;
    }
    return false;
  };

  std::function<void(int)> rec = [&](int depth) {
    if (depth == static_cast<int>(ints.size())) {
      ++out.assignments;
      MipModel lp = m.relaxed();
      for (int c : ints) lp.fix_column(c, val[c]);
      const LpSolution sol = solve_lp(lp);
      ++out.lp_solves;
      if (sol.status == LpStatus::Optimal && sol.objective < out.best) {
        out.best = sol.objective;
        out.x = sol.x;
      }
      return;
    }
    const int c = ints[depth];
    const Column& col = m.column(c);
    for (double v : {0.0, 1.0}) {
      if (v < col.lb || v > col.ub) continue;
      val[c] = v;
      bool ok = true;
      for (int r : check_at[depth]) {
        if (!row_ok(r)) {
          ok = false;
          break;
        }
      }
      if (ok) rec(depth + 1);
    }
    val[c] = 0.0;
  };
  rec(0);
  return out;
}

// All 0/1 assignments of `cols` that satisfy every row touching only those
// columns. Brute force, so keep cols short.
inline std::vector<std::vector<int>> feasible_assignments(const MipModel& m, const std::vector<int>& cols) {
  std::vector<int> pos(m.num_columns(), -1);
  for (int i = 0; i < static_cast<int>(cols.size()); ++i) pos[cols[i]] = i;
  std::vector<std::vector<std::pair<int, double>>> terms(m.num_rows());
  std::vector<char> inside(m.num_rows(), 1);
  for (const auto& t : m.triplets()) {
    if (pos[t.col] < 0) inside[t.row] = 0;
    else terms[t.row].push_back({pos[t.col], t.value});
  }
  std::vector<std::vector<int>> out;
  const long n = 1L << cols.size();
  for (long mask = 0; mask < n; ++mask) {
    bool ok = true;
    for (int i = 0; ok && i < static_cast<int>(cols.size()); ++i) {
      const double v = (mask >> i) & 1;
      if (v < m.column(cols[i]).lb || v > m.column(cols[i]).ub) ok = false;
    }
    for (int r = 0; ok && r < m.num_rows(); ++r) {
      if (!inside[r] || terms[r].empty()) continue;
      double a = 0;
      for (auto [i, v] : terms[r]) a += v * ((mask >> i) & 1);
      const double rhs = m.row(r).rhs;
      switch (m.row(r).sense) {
        case Sense::LessEqual: ok = a <= rhs + 1e-9; break;
        case Sense::GreaterEqual: ok = a >= rhs - 1e-9; break;
        case Sense::Equal: ok = std::abs(a - rhs) <= 1e-9; break;
      }
    }
    if (!ok) continue;
    std::vector<int> bits(cols.size());
    for (int i = 0; i < static_cast<int>(cols.size()); ++i) bits[i] = (mask >> i) & 1;
    out.push_back(std::move(bits));
  }
  return out;
}

}  // namespace stormdn::oracle
