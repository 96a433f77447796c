#pragma once

// Sparse mixed-integer linear model: columns with bounds and integrality,
// rows with a sense and right-hand side, and constraint triplets.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stormdn/error.hpp"

namespace stormdn {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense : char { LessEqual = 'L', Equal = 'E', GreaterEqual = 'G' };

struct Column {
  std::string name;
  double lb = 0.0;
  double ub = kInf;
  double cost = 0.0;
  bool integer = false;
};

struct Row {
  std::string name;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

using Terms = std::vector<std::pair<int, double>>;

struct ModelStats {
  int rows = 0;
  int columns = 0;
  int binaries = 0;
  int integers = 0;
  long nonzeros = 0;
};

class MipModel {
 public:
  int add_column(std::string name, double lb, double ub, double cost = 0.0, bool integer = false) {
    if (lb > ub) throw InvalidInput("column " + name + " has lb > ub");
    columns_.push_back({std::move(name), lb, ub, cost, integer});
    return static_cast<int>(columns_.size()) - 1;
  }

  int add_binary(std::string name, double cost = 0.0) {
    return add_column(std::move(name), 0.0, 1.0, cost, true);
  }

  // Adds `sum(terms) sense rhs`. Repeated columns are merged.
  int add_row(std::string name, const Terms& terms, Sense sense, double rhs) {
    const int r = static_cast<int>(rows_.size());
    rows_.push_back({std::move(name), sense, rhs});
    std::map<int, double> merged;
    for (auto [c, v] : terms) {
      if (c < 0 || c >= num_columns()) {
        throw InvalidInput("row " + rows_.back().name + " references unknown column");
      }
      merged[c] += v;
    }
    for (auto [c, v] : merged) {
      if (v != 0.0) triplets_.push_back({r, c, v});
    }
    return r;
  }

  void set_cost(int col, double cost) { columns_.at(col).cost = cost; }
  void add_cost(int col, double cost) { columns_.at(col).cost += cost; }
  void fix_column(int col, double value) {
    columns_.at(col).lb = value;
    columns_.at(col).ub = value;
  }

  double objective_offset = 0.0;
  // Big-M constants by name, exactly as used in the rows.
  std::map<std::string, double> big_m;
  std::vector<std::string> warnings;

  int num_columns() const { return static_cast<int>(columns_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  std::span<const Column> columns() const { return columns_; }
  std::span<const Row> rows() const { return rows_; }
  std::span<const Triplet> triplets() const { return triplets_; }
  const Column& column(int c) const { return columns_.at(c); }
  Column& column(int c) { return columns_.at(c); }
  const Row& row(int r) const { return rows_.at(r); }

  ModelStats stats() const {
    ModelStats s;
    s.rows = num_rows();
    s.columns = num_columns();
    for (const auto& c : columns_) {
      if (c.integer) {
        ++s.integers;
        if (c.lb >= 0.0 && c.ub <= 1.0) ++s.binaries;
      }
    }
    s.nonzeros = static_cast<long>(triplets_.size());
    return s;
  }

  double objective(std::span<const double> x) const {
    double v = objective_offset;
    for (int c = 0; c < num_columns(); ++c) v += columns_[c].cost * x[c];
    return v;
  }

  std::vector<double> row_activity(std::span<const double> x) const {
    std::vector<double> act(rows_.size(), 0.0);
    for (const auto& t : triplets_) act[t.row] += t.value * x[t.col];
    return act;
  }

  // Largest absolute violation of any row or column bound.
  double max_violation(std::span<const double> x) const {
    double worst = 0.0;
    const auto act = row_activity(x);
    for (int r = 0; r < num_rows(); ++r) {
      const double a = act[r];
      const double rhs = rows_[r].rhs;
      double v = 0.0;
      switch (rows_[r].sense) {
        case Sense::LessEqual: v = a - rhs; break;
        case Sense::GreaterEqual: v = rhs - a; break;
        case Sense::Equal: v = std::abs(a - rhs); break;
      }
      worst = std::max(worst, v);
    }
    for (int c = 0; c < num_columns(); ++c) {
      worst = std::max({worst, columns_[c].lb - x[c], x[c] - columns_[c].ub});
    }
    return worst;
  }

  // Name of the first row violated by more than tol, or empty.
  std::string first_violated_row(std::span<const double> x, double tol) const {
    const auto act = row_activity(x);
    for (int r = 0; r < num_rows(); ++r) {
      const double a = act[r];
      const double rhs = rows_[r].rhs;
      bool bad = false;
      switch (rows_[r].sense) {
        case Sense::LessEqual: bad = a > rhs + tol; break;
        case Sense::GreaterEqual: bad = a < rhs - tol; break;
        case Sense::Equal: bad = std::abs(a - rhs) > tol; break;
      }
      if (bad) return rows_[r].name;
    }
    return {};
  }

  // LP relaxation: same model with integrality dropped.
  MipModel relaxed() const {
    MipModel m = *this;
    for (auto& c : m.columns_) c.integer = false;
    return m;
  }

 private:
  std::vector<Column> columns_;
  std::vector<Row> rows_;
  std::vector<Triplet> triplets_;
};

}  // namespace stormdn
