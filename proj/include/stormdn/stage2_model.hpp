#pragma once

// Builds the sample-average MIP: DER placement (stage I) shared by every
// scenario, plus per-scenario repair scheduling, DER/load dispatch with droop
// and LinDistFlow power flow over periods 0..K (stage II).

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stormdn/error.hpp"
#include "stormdn/failure_model.hpp"
#include "stormdn/mip_model.hpp"
#include "stormdn/network_model.hpp"

namespace stormdn {

enum class Family { Ysc, Ygc, Yline, Kline, Kcc, Pg, Qg, Lcc, Pc, Qc, Pt, Qt, P, Q, Nu };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::Ysc: return "ysc";
    case Family::Ygc: return "ygc";
    case Family::Yline: return "yline";
    case Family::Kline: return "kline";
    case Family::Kcc: return "kcc";
    case Family::Pg: return "pg";
    case Family::Qg: return "qg";
    case Family::Lcc: return "lcc";
    case Family::Pc: return "pc";
    case Family::Qc: return "qc";
    case Family::Pt: return "pt";
    case Family::Qt: return "qt";
    case Family::P: return "P";
    case Family::Q: return "Q";
    case Family::Nu: return "nu";
  }
  return "?";
}

struct VarKey {
  Family family = Family::Ysc;
  std::array<int, 4> idx{-1, -1, -1, -1};
  auto operator<=>(const VarKey&) const = default;
};

inline std::string var_name(const VarKey& k) {
  std::string s = family_name(k.family);
  s += '[';
  bool first = true;
  for (int v : k.idx) {
    if (v < 0) break;
    if (!first) s += ',';
    s += std::to_string(v);
    first = false;
  }
  s += ']';
  return s;
}

// (family, indices) <-> column registry. Index order per family:
//   ysc[i]  ygc[i,d]  yline/kline[e,k,s]  kcc/lcc/pc/qc/pt/qt/nu[i,k,s]
//   pg/qg[i,d,k,s]  P/Q[e,k,s]
class VarIndex {
 public:
  static VarKey key(Family f, std::initializer_list<int> idx) {
    VarKey k;
    k.family = f;
    int n = 0;
    for (int v : idx) k.idx[n++] = v;
    return k;
  }

  int add(MipModel& m, Family f, std::initializer_list<int> idx, double lb, double ub, bool integer = false) {
    const VarKey k = key(f, idx);
    if (map_.count(k)) throw InvalidState("variable " + var_name(k) + " registered twice");
    const int c = m.add_column(var_name(k), lb, ub, 0.0, integer);
    map_.emplace(k, c);
    if (static_cast<int>(keys_.size()) <= c) keys_.resize(c + 1);
    keys_[c] = k;
    return c;
  }

  std::optional<int> find(Family f, std::initializer_list<int> idx) const {
    auto it = map_.find(key(f, idx));
    if (it == map_.end()) return std::nullopt;
    return it->second;
  }

  int at(Family f, std::initializer_list<int> idx) const {
    auto it = map_.find(key(f, idx));
    if (it == map_.end()) throw InvalidState("no variable " + var_name(key(f, idx)));
    return it->second;
  }

  const VarKey& key_of(int col) const { return keys_.at(col); }
  std::size_t size() const { return map_.size(); }

 private:
  std::map<VarKey, int> map_;
  std::vector<VarKey> keys_;
};

struct ResourceLimits {
  int G = 1;  // DER budget
  int Y = 1;  // repairs per period
  int K = 2;  // last period

  void validate() const {
    std::vector<std::string> bad;
    if (G < 0) bad.push_back("G must be >= 0");
    if (Y < 1) bad.push_back("Y must be >= 1");
    if (K < 1) bad.push_back("K must be >= 1");
    if (!bad.empty()) throw ValidationError(std::move(bad));
  }
};

// Stage-I decision: developed sites and the DER-to-node map. Both indexed by
// node; ygc[i][d] = 1 when DER d sits at node i.
struct Allocation {
  std::vector<std::uint8_t> ysc;
  std::vector<std::vector<std::uint8_t>> ygc;

  static Allocation empty(const Feeder& f, const DerSpec& der) {
    Allocation a;
    a.ysc.assign(f.num_nodes(), 0);
    a.ygc.assign(f.num_nodes(), std::vector<std::uint8_t>(der.count, 0));
    return a;
  }

  int der_count() const {
    int n = 0;
    for (const auto& row : ygc) {
      for (auto v : row) n += v;
    }
    return n;
  }

  // Node hosting DER d, or -1.
  int node_of(int d) const {
    for (std::size_t i = 0; i < ygc.size(); ++i) {
      if (ygc[i][d]) return static_cast<int>(i);
    }
    return -1;
  }
};

// Places the first `units` DERs at `node`.
inline Allocation allocate_at(const Feeder& f, const DerSpec& der, int node, int units) {
  Allocation a = Allocation::empty(f, der);
  if (node < 0 || node >= f.num_nodes()) throw InvalidInput("allocation node out of range");
  if (units < 0 || units > der.count) throw InvalidInput("allocation uses more DERs than exist");
  if (units > 0) a.ysc[node] = 1;
  for (int d = 0; d < units; ++d) a.ygc[node][d] = 1;
  return a;
}

inline void validate_allocation(const Allocation& a, const Feeder& f, const DerSpec& der, int G) {
  std::vector<std::string> bad;
  if (static_cast<int>(a.ysc.size()) != f.num_nodes() || static_cast<int>(a.ygc.size()) != f.num_nodes()) {
    throw InvalidInput("allocation size does not match the feeder");
  }
  std::vector<int> used(der.count, 0);
  int total = 0;
  for (int i = 0; i < f.num_nodes(); ++i) {
    if (static_cast<int>(a.ygc[i].size()) != der.count) throw InvalidInput("allocation DER count mismatch");
    int here = 0;
    for (int d = 0; d < der.count; ++d) {
      here += a.ygc[i][d];
      used[d] += a.ygc[i][d];
    }
    total += here;
    const std::string name = f.nodes[i].name;
    if ((a.ysc[i] || here > 0) && !f.nodes[i].site) bad.push_back(name + " is not a candidate site");
    if (a.ysc[i] && here == 0) bad.push_back(name + " is developed but hosts no DER");
    if (!a.ysc[i] && here > 0) bad.push_back(name + " hosts DERs but is not developed");
  }
  for (int d = 0; d < der.count; ++d) {
    if (used[d] > 1) bad.push_back("DER " + std::to_string(d) + " placed at more than one site");
  }
  if (total > G) bad.push_back("allocation uses " + std::to_string(total) + " DERs but G = " + std::to_string(G));
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

// Failed edges plus the substation edge, ascending.
inline std::vector<int> effective_failed_edges(const Feeder& f, const FailureScenario& s) {
  if (static_cast<int>(s.failed.size()) != f.num_edges()) {
    throw InvalidInput("scenario has " + std::to_string(s.failed.size()) + " edges, feeder has " +
                       std::to_string(f.num_edges()));
  }
  std::vector<int> out;
  const int sub = f.substation_edge();
  for (int e = 0; e < f.num_edges(); ++e) {
    if (s.failed[e] || e == sub) out.push_back(e);
  }
  return out;
}

inline int horizon_K(const Feeder& f, std::span<const FailureScenario> scenarios, int Y) {
  if (Y < 1) throw InvalidInput("Y must be >= 1");
  std::size_t worst = 1;
  for (const auto& s : scenarios) worst = std::max(worst, effective_failed_edges(f, s).size());
  return 1 + static_cast<int>((worst + Y - 1) / Y);
}

struct ModelOptions {
  double big_m_scale = 1.0;  // multiplies every big-M (validity checks)
  double nu_lb = 0.5;        // global bounds on every nu column
  double nu_ub = 1.5;
};

struct BigM {
  double flow_p = 0.0;
  double flow_q = 0.0;
  double voltage = 0.0;
  double droop = 0.0;
};

inline BigM big_m_values(const Feeder& f, const DerSpec& der, const ModelOptions& opt = {}) {
  BigM m;
  const double gen_p = der.count * der.pg_max;
  const double gen_q = der.count * der.pf_max * der.pg_max;
  m.flow_p = 2.0 * std::max(f.total_pc(), gen_p) * opt.big_m_scale;
  m.flow_q = 2.0 * (f.total_qc() + gen_q) * opt.big_m_scale;
  m.voltage = 2.0 * (opt.nu_ub - opt.nu_lb) * opt.big_m_scale;
  const double dev = std::max(opt.nu_ub - der.nu_ref, der.nu_ref - opt.nu_lb) + der.kq * der.pf_max * der.pg_max;
  m.droop = std::max(m.voltage, 2.0 * dev * opt.big_m_scale);
  // Flow bounds cannot go to zero on a load-free feeder.
  m.flow_p = std::max(m.flow_p, 1e-6);
  m.flow_q = std::max(m.flow_q, 1e-6);
  return m;
}

struct SaaModel {
  MipModel model;
  VarIndex index;
  std::vector<FailureScenario> scenarios;
  std::vector<std::vector<int>> eff_edges;  // per scenario
  ResourceLimits limits;
  BigM big_m;
  std::vector<int> sites;
  int der_count = 0;
  bool fixed_allocation = false;
};

// Closed-form column count of build_saa_mip / build_second_stage.
inline long expected_columns(const Feeder& f, const DerSpec& der, std::span<const FailureScenario> scenarios, int K) {
  const long U = static_cast<long>(f.sites().size());
  const long D = der.count;
  const long n = f.num_nodes() - 1;  // load nodes
  const long E = f.num_edges();
  long cols = U + U * D;
  for (const auto& s : scenarios) {
    const long eff = static_cast<long>(effective_failed_edges(f, s).size());
    // yline, kline on effective edges; kcc, lcc, pc, qc, pt, qt per load node;
    // pg, qg per site and DER; P, Q per edge; nu per node incl. the substation.
    cols += (K + 1) * (2 * eff + 6 * n + 2 * U * D + 2 * E + (n + 1));
  }
  return cols;
}

class SaaModelBuilder {
 public:
  SaaModelBuilder(const Feeder& f, const DerSpec& der, const ResourceLimits& limits, const ModelOptions& opt = {})
      : f_(f), der_(der), opt_(opt) {
    limits.validate();
    der.validate();
    out_.limits = limits;
    out_.big_m = big_m_values(f, der, opt);
    out_.sites = f.sites();
    out_.der_count = der.count;
    children_ = f.children_edges();
    auto& bm = out_.model.big_m;
    bm["L_f"] = out_.big_m.flow_p;
    bm["L_q"] = out_.big_m.flow_q;
    bm["L_v"] = out_.big_m.voltage;
    bm["L_droop"] = out_.big_m.droop;
  }

  // Stage-I columns; fixed to `a` when given.
  void register_first_stage(const std::optional<Allocation>& a) {
    auto& m = out_.model;
    out_.fixed_allocation = a.has_value();
    for (int i : out_.sites) {
      const int c = out_.index.add(m, Family::Ysc, {i}, 0.0, 1.0, true);
      if (a) m.fix_column(c, a->ysc[i]);
      for (int d = 0; d < der_.count; ++d) {
        const int g = out_.index.add(m, Family::Ygc, {i, d}, 0.0, 1.0, true);
        if (a) m.fix_column(g, a->ygc[i][d]);
      }
    }
  }

  void add_placement_constraints() {
    auto& m = out_.model;
    const auto& ix = out_.index;
    const int D = der_.count;
    Terms budget;
    for (int i : out_.sites) {
      Terms lo{{ix.at(Family::Ysc, {i}), 1.0}};
      Terms hi{{ix.at(Family::Ysc, {i}), -static_cast<double>(D)}};
      for (int d = 0; d < D; ++d) {
        const int g = ix.at(Family::Ygc, {i, d});
        lo.push_back({g, -1.0});
        hi.push_back({g, 1.0});
        budget.push_back({g, 1.0});
      }
      m.add_row("site_min[" + std::to_string(i) + "]", lo, Sense::LessEqual, 0.0);
      m.add_row("site_max[" + std::to_string(i) + "]", hi, Sense::LessEqual, 0.0);
    }
    for (int d = 0; d < D; ++d) {
      Terms once;
      for (int i : out_.sites) once.push_back({ix.at(Family::Ygc, {i, d}), 1.0});
      m.add_row("der_once[" + std::to_string(d) + "]", once, Sense::LessEqual, 1.0);
    }
    m.add_row("der_budget", budget, Sense::LessEqual, out_.limits.G);
    for (int d = 1; d < D; ++d) {
      Terms order;
      for (int i : out_.sites) {
        order.push_back({ix.at(Family::Ygc, {i, d}), 1.0});
        order.push_back({ix.at(Family::Ygc, {i, d - 1}), -1.0});
      }
      m.add_row("der_order[" + std::to_string(d) + "]", order, Sense::LessEqual, 0.0);
    }
  }

  // Registers the stage-II columns of a scenario and returns its index.
  int register_scenario(const FailureScenario& sc) {
    auto& m = out_.model;
    auto& ix = out_.index;
    const int s = static_cast<int>(out_.scenarios.size());
    out_.scenarios.push_back(sc);
    out_.eff_edges.push_back(effective_failed_edges(f_, sc));
    const int K = out_.limits.K;
    const auto& bm = out_.big_m;
    const double pg_max = der_.pg_max;
    const double qg_max = der_.pf_max * der_.pg_max;
    const double gen_p = der_.count * pg_max;
    const double gen_q = der_.count * qg_max;
    for (int k = 0; k <= K; ++k) {
      for (int e : out_.eff_edges[s]) {
        ix.add(m, Family::Yline, {e, k, s}, 0.0, 1.0, true);
        ix.add(m, Family::Kline, {e, k, s}, 0.0, 1.0, true);
      }
      for (int i = 1; i < f_.num_nodes(); ++i) {
        const Node& nd = f_.nodes[i];
        ix.add(m, Family::Kcc, {i, k, s}, 0.0, 1.0, true);
        ix.add(m, Family::Lcc, {i, k, s}, 0.0, 1.0);
        ix.add(m, Family::Pc, {i, k, s}, 0.0, nd.pc_max);
        ix.add(m, Family::Qc, {i, k, s}, 0.0, nd.qc_max);
        const bool site = nd.site && der_.count > 0;
        ix.add(m, Family::Pt, {i, k, s}, site ? -gen_p : 0.0, nd.pc_max);
        ix.add(m, Family::Qt, {i, k, s}, site ? -gen_q : 0.0, nd.qc_max);
      }
      for (int i : out_.sites) {
        for (int d = 0; d < der_.count; ++d) {
          ix.add(m, Family::Pg, {i, d, k, s}, 0.0, pg_max);
          ix.add(m, Family::Qg, {i, d, k, s}, -qg_max, qg_max);
        }
      }
      for (int e = 0; e < f_.num_edges(); ++e) {
        ix.add(m, Family::P, {e, k, s}, -bm.flow_p / 2, bm.flow_p / 2);
        ix.add(m, Family::Q, {e, k, s}, -bm.flow_q / 2, bm.flow_q / 2);
      }
      for (int i = 0; i < f_.num_nodes(); ++i) ix.add(m, Family::Nu, {i, k, s}, opt_.nu_lb, opt_.nu_ub);
    }
    return s;
  }

  void add_repair_constraints(int s) {
    auto& m = out_.model;
    const auto& ix = out_.index;
    const int K = out_.limits.K;
    const int sub = f_.substation_edge();
    const std::string ss = std::to_string(s);
    for (int k = 0; k <= K; ++k) {
      const std::string ks = std::to_string(k) + "," + ss;
      Terms crew;
      for (int e : out_.eff_edges[s]) {
        const std::string es = std::to_string(e) + "," + ks;
        const int y = ix.at(Family::Yline, {e, k, s});
        const int kl = ix.at(Family::Kline, {e, k, s});
        crew.push_back({y, 1.0});
        if (k == 0) {
          m.add_row("no_repair0[" + es + "]", {{y, 1.0}}, Sense::Equal, 0.0);
          m.add_row("damaged0[" + es + "]", {{kl, 1.0}}, Sense::Equal, 1.0);
        } else {
          const int prev = ix.at(Family::Kline, {e, k - 1, s});
          m.add_row("repair_link[" + es + "]", {{kl, 1.0}, {prev, -1.0}, {y, 1.0}}, Sense::Equal, 0.0);
        }
        if (k == K && e == sub) m.add_row("reconnect[" + es + "]", {{y, 1.0}}, Sense::Equal, 1.0);
      }
      m.add_row("crew[" + ks + "]", crew, Sense::LessEqual, out_.limits.Y);
    }
  }

  void add_dispatch_constraints(int s) {
    auto& m = out_.model;
    const auto& ix = out_.index;
    const int K = out_.limits.K;
    const double Ld = out_.big_m.droop;
    for (int k = 0; k <= K; ++k) {
      const std::string ks = std::to_string(k) + "," + std::to_string(s);
      for (int i : out_.sites) {
        for (int d = 0; d < der_.count; ++d) {
          const std::string tag = "[" + std::to_string(i) + "," + std::to_string(d) + "," + ks + "]";
          const int g = ix.at(Family::Ygc, {i, d});
          const int pg = ix.at(Family::Pg, {i, d, k, s});
          const int qg = ix.at(Family::Qg, {i, d, k, s});
          m.add_row("pg_cap" + tag, {{pg, 1.0}, {g, -der_.pg_max}}, Sense::LessEqual, 0.0);
          m.add_row("pf_hi" + tag, {{qg, 1.0}, {pg, -der_.pf_max}}, Sense::LessEqual, 0.0);
          m.add_row("pf_lo" + tag, {{qg, -1.0}, {pg, -der_.pf_max}}, Sense::LessEqual, 0.0);
          if (k >= 1 && k <= K - 1) {
            const int nu = ix.at(Family::Nu, {i, k, s});
            m.add_row("droop_hi" + tag, {{nu, 1.0}, {qg, der_.kq}, {g, Ld}}, Sense::LessEqual, der_.nu_ref + Ld);
            m.add_row("droop_lo" + tag, {{nu, -1.0}, {qg, -der_.kq}, {g, Ld}}, Sense::LessEqual,
                      -der_.nu_ref + Ld);
          }
        }
      }
      for (int i = 1; i < f_.num_nodes(); ++i) {
        const Node& nd = f_.nodes[i];
        const std::string tag = "[" + std::to_string(i) + "," + ks + "]";
        const int lcc = ix.at(Family::Lcc, {i, k, s});
        const int kcc = ix.at(Family::Kcc, {i, k, s});
        const int pc = ix.at(Family::Pc, {i, k, s});
        const int qc = ix.at(Family::Qc, {i, k, s});
        const int nu = ix.at(Family::Nu, {i, k, s});
        m.add_row("pc_def" + tag, {{pc, 1.0}, {lcc, -nd.pc_max}}, Sense::Equal, 0.0);
        m.add_row("qc_def" + tag, {{qc, 1.0}, {lcc, -nd.qc_max}}, Sense::Equal, 0.0);
        m.add_row("lcc_min" + tag, {{lcc, 1.0}, {kcc, nd.lcc_min}}, Sense::GreaterEqual, nd.lcc_min);
        m.add_row("lcc_max" + tag, {{lcc, 1.0}, {kcc, 1.0}}, Sense::LessEqual, 1.0);
        m.add_row("v_low" + tag, {{kcc, 1.0}, {nu, 1.0}}, Sense::GreaterEqual, nd.nu_min);
        m.add_row("v_high" + tag, {{kcc, 1.0}, {nu, -1.0}}, Sense::GreaterEqual, -nd.nu_max);
        Terms pt{{ix.at(Family::Pt, {i, k, s}), 1.0}, {pc, -1.0}};
        Terms qt{{ix.at(Family::Qt, {i, k, s}), 1.0}, {qc, -1.0}};
        if (nd.site) {
          for (int d = 0; d < der_.count; ++d) {
            pt.push_back({ix.at(Family::Pg, {i, d, k, s}), 1.0});
            qt.push_back({ix.at(Family::Qg, {i, d, k, s}), 1.0});
          }
        }
        m.add_row("pt_def" + tag, pt, Sense::Equal, 0.0);
        m.add_row("qt_def" + tag, qt, Sense::Equal, 0.0);
      }
    }
  }

  void add_powerflow_constraints(int s) {
    auto& m = out_.model;
    const auto& ix = out_.index;
    const int K = out_.limits.K;
    const auto& bm = out_.big_m;
    std::vector<char> eff(f_.num_edges(), 0);
    for (int e : out_.eff_edges[s]) eff[e] = 1;
    for (int k = 0; k <= K; ++k) {
      const std::string ks = std::to_string(k) + "," + std::to_string(s);
      for (int e = 0; e < f_.num_edges(); ++e) {
        const Edge& ed = f_.edges[e];
        const std::string tag = "[" + std::to_string(e) + "," + ks + "]";
        const int P = ix.at(Family::P, {e, k, s});
        const int Q = ix.at(Family::Q, {e, k, s});
        Terms pb{{P, 1.0}, {ix.at(Family::Pt, {ed.to, k, s}), -1.0}};
        Terms qb{{Q, 1.0}, {ix.at(Family::Qt, {ed.to, k, s}), -1.0}};
        for (int l : children_[ed.to]) {
          pb.push_back({ix.at(Family::P, {l, k, s}), -1.0});
          qb.push_back({ix.at(Family::Q, {l, k, s}), -1.0});
        }
        m.add_row("p_balance" + tag, pb, Sense::Equal, 0.0);
        m.add_row("q_balance" + tag, qb, Sense::Equal, 0.0);
        const int nj = ix.at(Family::Nu, {ed.to, k, s});
        const int ni = ix.at(Family::Nu, {ed.from, k, s});
        Terms drop{{nj, 1.0}, {ni, -1.0}, {P, 2.0 * ed.r}, {Q, 2.0 * ed.x}};
        if (eff[e]) {
          const int kl = ix.at(Family::Kline, {e, k, s});
          m.add_row("p_off_hi" + tag, {{P, 1.0}, {kl, bm.flow_p}}, Sense::LessEqual, bm.flow_p);
          m.add_row("p_off_lo" + tag, {{P, -1.0}, {kl, bm.flow_p}}, Sense::LessEqual, bm.flow_p);
          m.add_row("q_off_hi" + tag, {{Q, 1.0}, {kl, bm.flow_q}}, Sense::LessEqual, bm.flow_q);
          m.add_row("q_off_lo" + tag, {{Q, -1.0}, {kl, bm.flow_q}}, Sense::LessEqual, bm.flow_q);
          Terms hi = drop;
          hi.push_back({kl, -bm.voltage});
          Terms lo;
          for (auto [c, v] : drop) lo.push_back({c, -v});
          lo.push_back({kl, -bm.voltage});
          m.add_row("vdrop_hi" + tag, hi, Sense::LessEqual, 0.0);
          m.add_row("vdrop_lo" + tag, lo, Sense::LessEqual, 0.0);
        } else {
          m.add_row("vdrop" + tag, drop, Sense::Equal, 0.0);
        }
      }
      if (k == K) {
        m.add_row("nu_sub[" + ks + "]", {{ix.at(Family::Nu, {0, k, s}), 1.0}}, Sense::Equal, f_.nu_nom);
      }
    }
  }

  // Sum of C^SD over developed sites (unless fixed) plus the uniform scenario
  // average of per-period control and shedding costs.
  void add_objective() {
    auto& m = out_.model;
    const auto& ix = out_.index;
    if (!out_.fixed_allocation) {
      for (int i : out_.sites) m.add_cost(ix.at(Family::Ysc, {i}), f_.nodes[i].site_cost);
    }
    const int S = static_cast<int>(out_.scenarios.size());
    const int K = out_.limits.K;
    double offset = 0.0;
    for (int s = 0; s < S; ++s) {
      for (int k = 0; k <= K; ++k) {
        for (int i = 1; i < f_.num_nodes(); ++i) {
          const Node& nd = f_.nodes[i];
          m.add_cost(ix.at(Family::Lcc, {i, k, s}), -nd.cost_control / S);
          m.add_cost(ix.at(Family::Kcc, {i, k, s}), nd.cost_shed / S);
          offset += nd.cost_control / S;
        }
      }
    }
    m.objective_offset = offset;
  }

  SaaModel finish() { return std::move(out_); }

  SaaModel& current() { return out_; }

 private:
  const Feeder& f_;
  const DerSpec& der_;
  ModelOptions opt_;
  std::vector<std::vector<int>> children_;
  SaaModel out_;
};

inline void add_scenario_block(SaaModelBuilder& b, const FailureScenario& sc) {
  const int s = b.register_scenario(sc);
  b.add_repair_constraints(s);
  b.add_dispatch_constraints(s);
  b.add_powerflow_constraints(s);
}

inline void warn_short_horizon(SaaModel& sm, const Feeder& f) {
  const int need = horizon_K(f, sm.scenarios, sm.limits.Y);
  if (sm.limits.K < need) {
    sm.model.warnings.push_back("K = " + std::to_string(sm.limits.K) + " is below the repair horizon " +
                                std::to_string(need) + "; some failed lines cannot be repaired");
  }
}

inline SaaModel build_saa_mip(const Feeder& f, const DerSpec& der, std::span<const FailureScenario> scenarios,
                              const ResourceLimits& limits, const ModelOptions& opt = {}) {
  if (scenarios.empty()) throw InvalidInput("the SAA model needs at least one scenario");
  SaaModelBuilder b(f, der, limits, opt);
  b.register_first_stage(std::nullopt);
  b.add_placement_constraints();
  for (const auto& sc : scenarios) add_scenario_block(b, sc);
  b.add_objective();
  SaaModel sm = b.finish();
  warn_short_horizon(sm, f);
  return sm;
}

inline SaaModel build_second_stage(const Allocation& a, const Feeder& f, const DerSpec& der,
                                   const FailureScenario& s, const ResourceLimits& limits,
                                   const ModelOptions& opt = {}) {
  validate_allocation(a, f, der, limits.G);
  SaaModelBuilder b(f, der, limits, opt);
  b.register_first_stage(a);
  add_scenario_block(b, s);
  b.add_objective();
  SaaModel sm = b.finish();
  warn_short_horizon(sm, f);
  return sm;
}

}  // namespace stormdn
