#pragma once

// Bounded revised simplex for the LP relaxation of a MipModel.
//
// Internally every row i gets a logical variable s_i = a_i^T x with the row's
// bounds, so the working system is [A | -I] (x, s) = 0 with boxed or
// half-bounded variables. The basis is held as a sparse LU (Eigen) plus a
// product-form eta file that is rebuilt every `refactor_interval` updates.
// Primal simplex (composite phase 1, Harris ratio test, Bland fallback on
// stalling) solves from scratch; dual simplex re-optimises after bound changes
// when the current basis is still dual feasible.

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stormdn/error.hpp"
#include "stormdn/mip_model.hpp"

namespace stormdn {

enum class LpStatus { Optimal, Infeasible, Unbounded, Cutoff };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::Cutoff: return "cutoff";
  }
  return "?";
}

// Per-variable basis status; structurals first, then one logical per row.
enum class VarStatus : std::uint8_t { Basic, AtLower, AtUpper, AtZero };
using BasisDescriptor = std::vector<VarStatus>;

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective = kInf;
  std::vector<double> x;  // original column space
  BasisDescriptor basis;
  long iterations = 0;
  double max_residual = 0.0;
};

struct SimplexOptions {
  double primal_tol = 1e-9;
  double dual_tol = 1e-9;
  double pivot_tol = 1e-9;
  double residual_tol = 1e-7;  // unscaled, checked on the original rows
  long max_iterations = 5'000'000;
  int refactor_interval = 100;
  int stall_limit = 60;  // degenerate steps before switching to Bland's rule
  int max_refactor_retries = 3;
};

namespace detail {

class BasisFactor {
 public:
  using SpMat = Eigen::SparseMatrix<double>;

  bool factor(const SpMat& b) {
    etas_.clear();
    if (b.rows() == 0) return true;
    lu_.compute(b);
    return lu_.info() == Eigen::Success;
  }

  // v <- B^{-1} v
  void ftran(std::vector<double>& v) const {
    Eigen::Map<Eigen::VectorXd> vm(v.data(), static_cast<Eigen::Index>(v.size()));
    Eigen::VectorXd sol = lu_.solve(vm);
    vm = sol;
    for (const auto& e : etas_) {
      const double vr = v[e.r] / e.pivot;
      v[e.r] = vr;
      if (vr == 0.0) continue;
      for (std::size_t k = 0; k < e.idx.size(); ++k) v[e.idx[k]] -= e.val[k] * vr;
    }
  }

  // v <- B^{-T} v
  void btran(std::vector<double>& v) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = v[it->r];
      for (std::size_t k = 0; k < it->idx.size(); ++k) s -= it->val[k] * v[it->idx[k]];
      v[it->r] = s / it->pivot;
    }
    Eigen::Map<Eigen::VectorXd> vm(v.data(), static_cast<Eigen::Index>(v.size()));
    Eigen::VectorXd sol = lu_.transpose().solve(vm);
    vm = sol;
  }

  // Column r of the basis replaced by a column whose ftran image is alpha.
  void update(int r, const std::vector<double>& alpha) {
    Eta e;
    e.r = r;
    e.pivot = alpha[r];
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      if (static_cast<int>(i) != r && alpha[i] != 0.0) {
        e.idx.push_back(static_cast<int>(i));
        e.val.push_back(alpha[i]);
      }
    }
    etas_.push_back(std::move(e));
  }

  int updates() const { return static_cast<int>(etas_.size()); }

 private:
  struct Eta {
    int r = 0;
    double pivot = 1.0;
    std::vector<int> idx;
    std::vector<double> val;
  };
  mutable Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
};

inline double pow2_round(double s) {
  if (!(s > 0) || !std::isfinite(s)) return 1.0;
  return std::exp2(std::round(std::log2(s)));
}

}  // namespace detail

class SimplexSolver {
 public:
  explicit SimplexSolver(const MipModel& model, SimplexOptions opts = {})
      : model_(model), opt_(opts) {
    presolve();
    build_scaled();
    slack_basis();
  }

  bool trivially_infeasible() const { return presolve_infeasible_; }
  int num_columns() const { return n_; }

  // Root bounds (original space) after singleton-row tightening.
  double root_lb(int col) const { return root_lb_[col]; }
  double root_ub(int col) const { return root_ub_[col]; }

  // Restores every column to its root bounds.
  void reset_bounds() {
    for (int j = 0; j < n_; ++j) set_scaled_bounds(j, root_lb_[j], root_ub_[j]);
  }

  // Intersects with the root bounds. Returns false when the box is empty.
  bool set_column_bounds(int col, double lb, double ub) {
    const double l = std::max(lb, root_lb_[col]);
    const double u = std::min(ub, root_ub_[col]);
    if (l > u + 1e-12) return false;
    set_scaled_bounds(col, l, std::max(l, u));
    return true;
  }

  BasisDescriptor basis() const { return status_; }

  void set_basis(const BasisDescriptor& b) {
    if (b.size() != status_.size()) throw InvalidInput("basis descriptor has wrong size");
    status_ = b;
    rebuild_head();
    factor_ok_ = false;
  }

  // Solves from the current basis. Uses dual simplex when the basis is dual
  // feasible and primal infeasible, otherwise primal simplex. `cutoff` stops
  // the dual phase early once the objective provably exceeds it.
  LpSolution solve(double cutoff = kInf) {
    LpSolution sol;
    if (presolve_infeasible_) {
      sol.status = LpStatus::Infeasible;
      return sol;
    }
    for (int attempt = 0;; ++attempt) {
      sol = solve_once(cutoff);
      if (sol.status != LpStatus::Optimal) return sol;
      if (sol.max_residual <= opt_.residual_tol) return sol;
      if (attempt >= opt_.max_refactor_retries) {
        throw NumericalFailure("simplex residual " + std::to_string(sol.max_residual) +
                               " exceeds tolerance after refactorization retries");
      }
      factor_ok_ = false;
      if (attempt + 1 == opt_.max_refactor_retries) slack_basis();
    }
  }

  long total_iterations() const { return total_iterations_; }

 private:
  // ---------------------------------------------------------------- setup --
  void presolve() {
    n_ = model_.num_columns();
    root_lb_.resize(n_);
    root_ub_.resize(n_);
    for (int j = 0; j < n_; ++j) {
      root_lb_[j] = model_.column(j).lb;
      root_ub_[j] = model_.column(j).ub;
    }
    const int mrows = model_.num_rows();
    std::vector<int> count(mrows, 0);
    for (const auto& t : model_.triplets()) ++count[t.row];
    std::vector<int> single_col(mrows, -1);
    std::vector<double> single_val(mrows, 0.0);
    for (const auto& t : model_.triplets()) {
      single_col[t.row] = t.col;
      single_val[t.row] = t.value;
    }
    row_map_.assign(mrows, -1);
    for (int r = 0; r < mrows; ++r) {
      const Row& row = model_.row(r);
      double rl = row.sense == Sense::LessEqual ? -kInf : row.rhs;
      double ru = row.sense == Sense::GreaterEqual ? kInf : row.rhs;
      if (count[r] == 0) {
        if (rl > 1e-9 || ru < -1e-9) presolve_infeasible_ = true;
        continue;
      }
      if (count[r] == 1) {
        const int j = single_col[r];
        const double a = single_val[r];
        double l = rl / a, u = ru / a;
        if (a < 0) std::swap(l, u);
        root_lb_[j] = std::max(root_lb_[j], l);
        root_ub_[j] = std::min(root_ub_[j], u);
        continue;
      }
      row_map_[r] = m_++;
      row_lo_.push_back(rl);
      row_hi_.push_back(ru);
    }
    for (int j = 0; j < n_; ++j) {
      if (model_.column(j).integer) {
        root_lb_[j] = std::ceil(root_lb_[j] - 1e-9);
        root_ub_[j] = std::floor(root_ub_[j] + 1e-9);
      }
      if (root_lb_[j] > root_ub_[j] + 1e-9) presolve_infeasible_ = true;
      if (root_lb_[j] > root_ub_[j]) root_ub_[j] = root_lb_[j];
    }
  }

  void build_scaled() {
    // CSC of the kept rows.
    std::vector<std::vector<std::pair<int, double>>> cols(n_);
    for (const auto& t : model_.triplets()) {
      const int r = row_map_[t.row];
      if (r >= 0) cols[t.col].push_back({r, t.value});
    }
    row_scale_.assign(m_, 1.0);
    col_scale_.assign(n_, 1.0);
    // Geometric-mean passes followed by row equilibration; factors are powers
    // of two so scaling introduces no rounding.
    for (int pass = 0; pass < 6; ++pass) {
      std::vector<double> rmin(m_, kInf), rmax(m_, 0.0);
      for (int j = 0; j < n_; ++j) {
        for (auto [r, v] : cols[j]) {
          const double a = std::abs(v) * row_scale_[r] * col_scale_[j];
          rmin[r] = std::min(rmin[r], a);
          rmax[r] = std::max(rmax[r], a);
        }
      }
      for (int r = 0; r < m_; ++r) {
        if (rmax[r] > 0) row_scale_[r] *= detail::pow2_round(1.0 / std::sqrt(rmin[r] * rmax[r]));
      }
      for (int j = 0; j < n_; ++j) {
        double cmin = kInf, cmax = 0.0;
        for (auto [r, v] : cols[j]) {
          const double a = std::abs(v) * row_scale_[r] * col_scale_[j];
          cmin = std::min(cmin, a);
          cmax = std::max(cmax, a);
        }
        if (cmax > 0) col_scale_[j] *= detail::pow2_round(1.0 / std::sqrt(cmin * cmax));
      }
    }
    {
      std::vector<double> rmax(m_, 0.0);
      for (int j = 0; j < n_; ++j) {
        for (auto [r, v] : cols[j]) {
          rmax[r] = std::max(rmax[r], std::abs(v) * row_scale_[r] * col_scale_[j]);
        }
      }
      for (int r = 0; r < m_; ++r) {
        if (rmax[r] > 0) row_scale_[r] *= detail::pow2_round(1.0 / rmax[r]);
      }
    }
    col_start_.assign(n_ + 1, 0);
    for (int j = 0; j < n_; ++j) {
      std::sort(cols[j].begin(), cols[j].end());
      col_start_[j + 1] = col_start_[j] + static_cast<int>(cols[j].size());
      for (auto [r, v] : cols[j]) {
        row_idx_.push_back(r);
        val_.push_back(v * row_scale_[r] * col_scale_[j]);
      }
    }
    const int total = n_ + m_;
    lb_.assign(total, 0.0);
    ub_.assign(total, 0.0);
    cost_.assign(total, 0.0);
    for (int j = 0; j < n_; ++j) {
      cost_[j] = model_.column(j).cost * col_scale_[j];
      set_scaled_bounds(j, root_lb_[j], root_ub_[j]);
    }
    for (int i = 0; i < m_; ++i) {
      lb_[n_ + i] = row_lo_[i] * row_scale_[i];
      ub_[n_ + i] = row_hi_[i] * row_scale_[i];
    }
  }

  void set_scaled_bounds(int j, double l, double u) {
    lb_[j] = l / col_scale_[j];
    ub_[j] = u / col_scale_[j];
  }

  void slack_basis() {
    const int total = n_ + m_;
    status_.assign(total, VarStatus::AtLower);
    for (int j = 0; j < n_; ++j) status_[j] = resting_status(j);
    for (int i = 0; i < m_; ++i) status_[n_ + i] = VarStatus::Basic;
    rebuild_head();
    factor_ok_ = false;
  }

  VarStatus resting_status(int j) const {
    if (std::isfinite(lb_[j])) return VarStatus::AtLower;
    if (std::isfinite(ub_[j])) return VarStatus::AtUpper;
    return VarStatus::AtZero;
  }

  void rebuild_head() {
    head_.clear();
    pos_.assign(n_ + m_, -1);
    for (int j = 0; j < n_ + m_; ++j) {
      if (status_[j] == VarStatus::Basic) {
        pos_[j] = static_cast<int>(head_.size());
        head_.push_back(j);
      }
    }
    if (static_cast<int>(head_.size()) != m_) {
      slack_basis();
    }
  }

  // ------------------------------------------------------------ algebra --
  template <typename F>
  void for_column(int j, F&& f) const {
    if (j < n_) {
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) f(row_idx_[k], val_[k]);
    } else {
      f(j - n_, -1.0);
    }
  }

  double dot_column(const std::vector<double>& y, int j) const {
    if (j >= n_) return -y[j - n_];
    double s = 0.0;
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) s += y[row_idx_[k]] * val_[k];
    return s;
  }

  bool refactor() {
    if (m_ == 0) {
      factor_ok_ = true;
      return true;
    }
    detail::BasisFactor::SpMat b(m_, m_);
    std::vector<Eigen::Triplet<double>> trip;
    for (int p = 0; p < m_; ++p) {
      for_column(head_[p], [&](int r, double v) { trip.emplace_back(r, p, v); });
    }
    b.setFromTriplets(trip.begin(), trip.end());
    b.makeCompressed();
    if (!factor_.factor(b)) return false;
    factor_ok_ = true;
    return true;
  }

  // Refactors, falling back to the slack basis when the basis is singular.
  void ensure_factor() {
    if (factor_ok_ && factor_.updates() < opt_.refactor_interval) return;
    if (!refactor()) {
      slack_basis();
      if (!refactor()) throw NumericalFailure("cannot factor the slack basis");
    }
    compute_primal();
  }

  double nonbasic_value(int j) const {
    switch (status_[j]) {
      case VarStatus::AtLower: return lb_[j];
      case VarStatus::AtUpper: return ub_[j];
      default: return 0.0;
    }
  }

  void compute_primal() {
    x_.assign(n_ + m_, 0.0);
    std::vector<double> rhs(m_, 0.0);
    for (int j = 0; j < n_ + m_; ++j) {
      if (status_[j] == VarStatus::Basic) continue;
      x_[j] = nonbasic_value(j);
      if (x_[j] != 0.0) for_column(j, [&](int r, double v) { rhs[r] -= v * x_[j]; });
    }
    if (m_ > 0) factor_.ftran(rhs);
    for (int p = 0; p < m_; ++p) x_[head_[p]] = rhs[p];
  }

  // y = B^{-T} c_B
  std::vector<double> duals(const std::vector<double>& cb) const {
    std::vector<double> y = cb;
    if (m_ > 0) factor_.btran(y);
    return y;
  }

  double infeasibility(int j) const {
    if (x_[j] < lb_[j] - opt_.primal_tol) return lb_[j] - x_[j];
    if (x_[j] > ub_[j] + opt_.primal_tol) return x_[j] - ub_[j];
    return 0.0;
  }

  double scaled_objective() const {
    double v = 0.0;
    for (int j = 0; j < n_; ++j) v += cost_[j] * x_[j];
    return v;
  }

  bool is_candidate(int j, double d) const {
    switch (status_[j]) {
      case VarStatus::Basic: return false;
      case VarStatus::AtLower: return d < -opt_.dual_tol && ub_[j] > lb_[j];
      case VarStatus::AtUpper: return d > opt_.dual_tol && ub_[j] > lb_[j];
      case VarStatus::AtZero: return std::abs(d) > opt_.dual_tol;
    }
    return false;
  }

  void pivot(int r, int q, const std::vector<double>& alpha, VarStatus leaving_status) {
    const int p = head_[r];
    status_[p] = leaving_status;
    pos_[p] = -1;
    head_[r] = q;
    pos_[q] = r;
    status_[q] = VarStatus::Basic;
    factor_.update(r, alpha);
  }

  // ------------------------------------------------------------- primal --
  enum class Outcome { Optimal, Infeasible, Unbounded, Cutoff, IterationLimit };

  Outcome primal(long& iters) {
    int stall = 0;
    bool bland = false;
    std::vector<double> cb(m_), alpha(m_);
    while (true) {
      if (iters >= opt_.max_iterations) return Outcome::IterationLimit;
      ensure_factor();
      double infeas = 0.0;
      for (int p = 0; p < m_; ++p) {
        const int j = head_[p];
        if (x_[j] < lb_[j] - opt_.primal_tol) {
          cb[p] = -1.0;
          infeas += lb_[j] - x_[j];
        } else if (x_[j] > ub_[j] + opt_.primal_tol) {
          cb[p] = 1.0;
          infeas += x_[j] - ub_[j];
        } else {
          cb[p] = 0.0;
        }
      }
      const bool phase1 = infeas > 0.0;
      if (!phase1) {
        for (int p = 0; p < m_; ++p) cb[p] = cost_[head_[p]];
      }
      const auto y = duals(cb);

      // Pricing: Dantzig, or lowest index while in Bland mode.
      int q = -1;
      double best = 0.0, dq = 0.0;
      for (int j = 0; j < n_ + m_; ++j) {
        if (status_[j] == VarStatus::Basic) continue;
        const double d = (phase1 ? 0.0 : cost_[j]) - dot_column(y, j);
        if (!is_candidate(j, d)) continue;
        if (bland) {
          q = j;
          dq = d;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          q = j;
          dq = d;
        }
      }
      if (q < 0) return phase1 ? Outcome::Infeasible : Outcome::Optimal;

      std::fill(alpha.begin(), alpha.end(), 0.0);
      for_column(q, [&](int r, double v) { alpha[r] = v; });
      if (m_ > 0) factor_.ftran(alpha);
      const double dir = dq < 0 ? 1.0 : -1.0;

      // Harris two-pass ratio test on basic variables; x_B moves by
      // -dir * theta * alpha.
      auto limit = [&](int p, double slack) -> double {
        const int j = head_[p];
        const double g = -dir * alpha[p];
        if (std::abs(g) < opt_.pivot_tol) return kInf;
        const double xj = x_[j];
        const bool below = xj < lb_[j] - opt_.primal_tol;
        const bool above = xj > ub_[j] + opt_.primal_tol;
        if (below) return g > 0 ? (lb_[j] + slack - xj) / g : kInf;
        if (above) return g < 0 ? (xj - ub_[j] + slack) / -g : kInf;
        if (g < 0) return std::isfinite(lb_[j]) ? (xj - lb_[j] + slack) / -g : kInf;
        return std::isfinite(ub_[j]) ? (ub_[j] + slack - xj) / g : kInf;
      };
      double theta_max = kInf;
      for (int p = 0; p < m_; ++p) theta_max = std::min(theta_max, limit(p, opt_.primal_tol));
      int r = -1;
      double theta = kInf, best_alpha = 0.0;
      if (std::isfinite(theta_max)) {
        for (int p = 0; p < m_; ++p) {
          const double t = limit(p, 0.0);
          if (t > theta_max) continue;
          const double a = std::abs(alpha[p]);
          const bool take = bland ? (r < 0 || head_[p] < head_[r]) : a > best_alpha;
          if (take) {
            r = p;
            best_alpha = a;
            theta = std::max(t, 0.0);
          }
        }
      }
      const double flip = ub_[q] - lb_[q];
      ++iters;
      if (std::isfinite(flip) && flip <= theta) {
        // Bound flip, basis unchanged.
        for (int p = 0; p < m_; ++p) x_[head_[p]] -= dir * flip * alpha[p];
        status_[q] = status_[q] == VarStatus::AtLower ? VarStatus::AtUpper : VarStatus::AtLower;
        x_[q] = nonbasic_value(q);
        stall = 0;
        bland = false;
        continue;
      }
      if (r < 0) {
        if (phase1) {
          factor_ok_ = false;  // inconsistent; refactor and retry
          if (++stall > opt_.stall_limit * 4) throw NumericalFailure("phase 1 lost descent");
          continue;
        }
        return Outcome::Unbounded;
      }
      const int leaving = head_[r];
      VarStatus ls;
      if (x_[leaving] < lb_[leaving] - opt_.primal_tol) {
        ls = VarStatus::AtLower;  // rose onto its lower bound
      } else if (x_[leaving] > ub_[leaving] + opt_.primal_tol) {
        ls = VarStatus::AtUpper;
      } else {
        ls = -dir * alpha[r] < 0 ? VarStatus::AtLower : VarStatus::AtUpper;
      }
      for (int p = 0; p < m_; ++p) x_[head_[p]] -= dir * theta * alpha[p];
      x_[q] += dir * theta;
      pivot(r, q, alpha, ls);
      x_[leaving] = nonbasic_value(leaving);
      if (theta < 1e-12) {
        if (++stall > opt_.stall_limit) bland = true;
      } else {
        stall = 0;
        bland = false;
      }
    }
  }

  // --------------------------------------------------------------- dual --
  // Returns nullopt when the basis is not dual feasible.
  std::optional<Outcome> dual(long& iters, double cutoff) {
    std::vector<double> cb(m_), rho(m_), alpha(m_), d(n_ + m_, 0.0);
    int stall = 0;
    bool bland = false;
    while (true) {
      if (iters >= opt_.max_iterations) return Outcome::IterationLimit;
      ensure_factor();
      for (int p = 0; p < m_; ++p) cb[p] = cost_[head_[p]];
      const auto y = duals(cb);
      bool flipped = false;
      for (int j = 0; j < n_ + m_; ++j) {
        if (status_[j] == VarStatus::Basic) continue;
        d[j] = cost_[j] - dot_column(y, j);
        const bool wrong = (status_[j] == VarStatus::AtLower && d[j] < -opt_.dual_tol) ||
                           (status_[j] == VarStatus::AtUpper && d[j] > opt_.dual_tol) ||
                           (status_[j] == VarStatus::AtZero && std::abs(d[j]) > opt_.dual_tol);
        if (!wrong || lb_[j] == ub_[j]) continue;
        if (std::isfinite(lb_[j]) && std::isfinite(ub_[j])) {
          status_[j] = d[j] < 0 ? VarStatus::AtUpper : VarStatus::AtLower;
          flipped = true;
        } else {
          return std::nullopt;
        }
      }
      if (flipped) compute_primal();
      if (scaled_objective() > cutoff + 1e-9 * std::max(1.0, std::abs(cutoff))) return Outcome::Cutoff;

      // Leaving row: largest primal infeasibility.
      int r = -1;
      double worst = 0.0;
      for (int p = 0; p < m_; ++p) {
        const double inf = infeasibility(head_[p]);
        if (inf <= 0.0) continue;
        if (bland ? (r < 0 || head_[p] < head_[r]) : inf > worst) {
          worst = inf;
          r = p;
        }
      }
      if (r < 0) return Outcome::Optimal;
      const int leaving = head_[r];
      const bool to_lower = x_[leaving] < lb_[leaving];

      std::fill(rho.begin(), rho.end(), 0.0);
      rho[r] = 1.0;
      factor_.btran(rho);

      // Harris ratio test on |d_j / alpha_rj|.
      auto eligible = [&](int j, double a) {
        if (status_[j] == VarStatus::Basic || lb_[j] == ub_[j] || std::abs(a) < opt_.pivot_tol) return false;
        switch (status_[j]) {
          case VarStatus::AtLower: return to_lower ? a < 0 : a > 0;
          case VarStatus::AtUpper: return to_lower ? a > 0 : a < 0;
          case VarStatus::AtZero: return true;
          default: return false;
        }
      };
      std::vector<std::pair<int, double>> cand;
      double theta_max = kInf;
      for (int j = 0; j < n_ + m_; ++j) {
        if (status_[j] == VarStatus::Basic) continue;
        const double a = dot_column(rho, j);
        if (!eligible(j, a)) continue;
        cand.push_back({j, a});
        theta_max = std::min(theta_max, (std::abs(d[j]) + opt_.dual_tol) / std::abs(a));
      }
      if (cand.empty()) return Outcome::Infeasible;
      int q = -1;
      double best_alpha = 0.0;
      for (auto [j, a] : cand) {
        if (std::abs(d[j]) / std::abs(a) > theta_max) continue;
        if (bland ? (q < 0 || j < q) : std::abs(a) > best_alpha) {
          best_alpha = std::abs(a);
          q = j;
        }
      }

      std::fill(alpha.begin(), alpha.end(), 0.0);
      for_column(q, [&](int i, double v) { alpha[i] = v; });
      factor_.ftran(alpha);
      if (std::abs(alpha[r]) < opt_.pivot_tol) {
        factor_ok_ = false;
        if (++stall > opt_.stall_limit * 4) throw NumericalFailure("dual simplex pivot breakdown");
        continue;
      }
      const double target = to_lower ? lb_[leaving] : ub_[leaving];
      const double step = (x_[leaving] - target) / alpha[r];
      for (int p = 0; p < m_; ++p) x_[head_[p]] -= step * alpha[p];
      x_[q] += step;
      pivot(r, q, alpha, to_lower ? VarStatus::AtLower : VarStatus::AtUpper);
      x_[leaving] = target;
      ++iters;
      if (std::abs(d[q]) < 1e-12) {
        if (++stall > opt_.stall_limit) bland = true;
      } else {
        stall = 0;
        bland = false;
      }
    }
  }

  // ------------------------------------------------------------- driver --
  LpSolution solve_once(double cutoff) {
    LpSolution sol;
    long iters = 0;
    // Nonbasic variables follow their (possibly changed) bounds.
    for (int j = 0; j < n_ + m_; ++j) {
      if (status_[j] == VarStatus::Basic) continue;
      if (status_[j] == VarStatus::AtLower && !std::isfinite(lb_[j])) status_[j] = resting_status(j);
      if (status_[j] == VarStatus::AtUpper && !std::isfinite(ub_[j])) status_[j] = resting_status(j);
    }
    factor_ok_ = false;
    ensure_factor();
    compute_primal();

    const double scaled_cutoff = std::isfinite(cutoff) ? cutoff - model_.objective_offset : kInf;
    Outcome out = Outcome::Optimal;
    bool need_primal = true;
    bool primal_infeasible = false;
    for (int p = 0; p < m_ && !primal_infeasible; ++p) primal_infeasible = infeasibility(head_[p]) > 0.0;
    if (primal_infeasible) {
      if (auto d = dual(iters, scaled_cutoff)) {
        out = *d;
        need_primal = out == Outcome::Optimal;
      }
    }
    if (need_primal) out = primal(iters);
    total_iterations_ += iters;
    sol.iterations = iters;
    sol.basis = status_;
    switch (out) {
      case Outcome::Infeasible: sol.status = LpStatus::Infeasible; return sol;
      case Outcome::Unbounded:
        sol.status = LpStatus::Unbounded;
        sol.objective = -kInf;
        return sol;
      case Outcome::Cutoff:
        sol.status = LpStatus::Cutoff;
        sol.objective = scaled_objective() + model_.objective_offset;
        return sol;
      case Outcome::IterationLimit:
        throw NumericalFailure("simplex iteration limit reached");
      case Outcome::Optimal: break;
    }
    sol.status = LpStatus::Optimal;
    sol.x.resize(n_);
    for (int j = 0; j < n_; ++j) {
      sol.x[j] = x_[j] * col_scale_[j];
    }
    sol.objective = model_.objective(sol.x);
    sol.max_residual = residual(sol.x);
    return sol;
  }

  double residual(const std::vector<double>& x) const {
    double worst = 0.0;
    const auto act = model_.row_activity(x);
    for (int r = 0; r < model_.num_rows(); ++r) {
      const Row& row = model_.row(r);
      double v = 0.0;
      switch (row.sense) {
        case Sense::LessEqual: v = act[r] - row.rhs; break;
        case Sense::GreaterEqual: v = row.rhs - act[r]; break;
        case Sense::Equal: v = std::abs(act[r] - row.rhs); break;
      }
      // Row equilibration: compare in the scaled metric where available.
      const int k = row_map_[r];
      if (k >= 0) v *= row_scale_[k];
      worst = std::max(worst, v);
    }
    for (int j = 0; j < n_; ++j) {
      worst = std::max({worst, (lb_[j] * col_scale_[j] - x[j]), (x[j] - ub_[j] * col_scale_[j])});
    }
    return worst;
  }

  const MipModel& model_;
  SimplexOptions opt_;
  int n_ = 0;
  int m_ = 0;
  bool presolve_infeasible_ = false;
  std::vector<int> row_map_;
  std::vector<double> row_lo_, row_hi_;
  std::vector<double> root_lb_, root_ub_;
  std::vector<double> row_scale_, col_scale_;
  std::vector<int> col_start_, row_idx_;
  std::vector<double> val_;
  std::vector<double> lb_, ub_, cost_, x_;
  BasisDescriptor status_;
  std::vector<int> head_, pos_;
  detail::BasisFactor factor_;
  bool factor_ok_ = false;
  long total_iterations_ = 0;
};

// Solves the LP relaxation of `model` from a slack basis.
inline LpSolution solve_lp(const MipModel& model, const SimplexOptions& opts = {}) {
  SimplexSolver solver(model, opts);
  return solver.solve();
}

}  // namespace stormdn
