#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "stormdn/branch_and_bound.hpp"
#include "stormdn/io.hpp"
#include "stormdn/saa.hpp"
#include "stormdn/stage2_model.hpp"

using namespace stormdn;

namespace {

const std::string kData = STORMDN_DATA_DIR;

FailureScenario scenario(const Feeder& f, const std::vector<int>& failed) {
  FailureScenario s;
  s.failed.assign(f.num_edges(), 0);
  for (int e : failed) s.failed[e] = 1;
  return s;
}

FailureScenario all_failed(const Feeder& f) {
  std::vector<int> all;
  for (int e = 0; e < f.num_edges(); ++e) all.push_back(e);
  return scenario(f, all);
}

int edge_between(const Feeder& f, const std::string& a, const std::string& b) {
  for (int e = 0; e < f.num_edges(); ++e) {
    if (f.nodes[f.edges[e].from].name == a && f.nodes[f.edges[e].to].name == b) return e;
  }
  throw std::runtime_error("no edge " + a + "-" + b);
}

// 0 -- A, where A carries the load and is the only site.
FeederFile two_node(double site_cost = 0.0) {
  FeederFile ff;
  Feeder& f = ff.feeder;
  f.nodes.push_back({"0"});
  Node a{"A"};
  a.pc_max = 0.1;
  a.qc_max = 0.04;
  a.cost_shed = 1000;
  a.cost_control = 100;
  a.site = true;
  a.site_cost = site_cost;
  f.nodes.push_back(a);
  f.edges.push_back({0, 1, 0.01, 0.01, {}});
  ff.der = {1, 0.2, 0.484322, 0.05, 1.0};
  return ff;
}

// Same as `two_node` with two sites at the end of a short chain.
FeederFile two_sites() {
  FeederFile ff = two_node();
  Node b{"B"};
  b.site = true;
  ff.feeder.nodes.push_back(b);
  ff.feeder.edges.push_back({1, 2, 0.01, 0.01, {}});
  ff.der.count = 2;
  return ff;
}

std::vector<int> placement_columns(const SaaModel& sm) {
  std::vector<int> cols;
  for (int i : sm.sites) {
    cols.push_back(sm.index.at(Family::Ysc, {i}));
    for (int d = 0; d < sm.der_count; ++d) cols.push_back(sm.index.at(Family::Ygc, {i, d}));
  }
  return cols;
}

std::vector<int> repair_columns(const SaaModel& sm, int s) {
  std::vector<int> cols;
  for (int k = 0; k <= sm.limits.K; ++k) {
    for (int e : sm.eff_edges[s]) {
      cols.push_back(sm.index.at(Family::Yline, {e, k, s}));
      cols.push_back(sm.index.at(Family::Kline, {e, k, s}));
    }
  }
  return cols;
}

MipSolution solve(const MipModel& m) {
  MipOptions o;
  o.time_limit_s = 60;
  return solve_mip(m, o);
}

double obj_tol(double v) { return 1e-6 * std::max(1.0, std::abs(v)); }

}  // namespace

TEST(HorizonK, SubstationOnly) {
  const auto ff = read_feeder(kData + "/feeder3.json");
  const std::vector<FailureScenario> s{scenario(ff.feeder, {0})};
  EXPECT_EQ(horizon_K(ff.feeder, s, 1), 2);
}

TEST(HorizonK, CeilingArithmetic) {
  const auto f = read_feeder(kData + "/feeder12.json").feeder;
  const std::vector<FailureScenario> s{scenario(f, {1, 2, 3, 4, 5})};
  ASSERT_EQ(effective_failed_edges(f, s[0]).size(), 6u);
  EXPECT_EQ(horizon_K(f, s, 2), 4);
  EXPECT_EQ(horizon_K(f, s, 4), 3);
  EXPECT_THROW(horizon_K(f, s, 0), InvalidInput);
}

TEST(HorizonK, TwelveNodeExampleScheduleIsFeasible) {
  const auto ff = read_feeder(kData + "/feeder12.json");
  const Feeder& f = ff.feeder;
  const int sub = edge_between(f, "0", "A"), bc = edge_between(f, "B", "C"), de = edge_between(f, "D", "E"),
            di = edge_between(f, "D", "I"), dk = edge_between(f, "D", "K");
  const std::vector<FailureScenario> s{scenario(f, {sub, bc, de, di, dk})};
  const int K = horizon_K(f, s, 2);
  EXPECT_EQ(K, 4);
  const ResourceLimits lim{1, 2, K};
  SaaModel sm = build_second_stage(allocate_at(f, ff.der, *f.node_index("D"), 1), f, ff.der, s[0], lim);
  const std::map<int, int> when{{de, 1}, {di, 1}, {dk, 2}, {bc, 2}, {sub, K}};
  for (int k = 0; k <= K; ++k) {
    for (int e : sm.eff_edges[0]) sm.model.fix_column(sm.index.at(Family::Yline, {e, k, 0}), when.at(e) == k);
  }
  // Feasibility only.
  for (int c = 0; c < sm.model.num_columns(); ++c) sm.model.set_cost(c, 0.0);
  const auto sol = solve(sm.model);
  ASSERT_EQ(sol.status, MipStatus::Optimal);
  EXPECT_LE(sm.model.max_violation(sol.x), 1e-6);
}

TEST(Placement, BudgetZeroForcesNothing) {
  const auto ff = two_sites();
  const SaaModel sm = build_saa_mip(ff.feeder, ff.der, std::vector{scenario(ff.feeder, {})}, {0, 1, 2});
  const auto pats = oracle::feasible_assignments(sm.model, placement_columns(sm));
  ASSERT_EQ(pats.size(), 1u);
  for (int v : pats[0]) EXPECT_EQ(v, 0);
}

TEST(Placement, OneSiteTwoDers) {
  auto ff = two_node();
  ff.der.count = 2;
  const SaaModel sm = build_saa_mip(ff.feeder, ff.der, std::vector{scenario(ff.feeder, {})}, {2, 1, 2});
  const auto pats = oracle::feasible_assignments(sm.model, placement_columns(sm));
  int best = 0;
  for (const auto& p : pats) {
    const int used = p[1] + p[2];
    if (used == 2) EXPECT_EQ(p[0], 1);
    best = std::max(best, used);
  }
  EXPECT_EQ(best, 2);
}

// Row-level enumeration against the placement rules stated directly: each DER
// at one site at most, a site is developed iff it hosts a DER, at most G
// DERs, and DER d is used only when d-1 is.
TEST(Placement, TwoSitesTwoDersBudgetOne) {
  const auto ff = two_sites();
  const SaaModel sm = build_saa_mip(ff.feeder, ff.der, std::vector{scenario(ff.feeder, {})}, {1, 1, 2});
  const auto cols = placement_columns(sm);  // ysc_u, ygc_u0, ygc_u1 per site
  const auto pats = oracle::feasible_assignments(sm.model, cols);
  std::set<std::vector<int>> rows(pats.begin(), pats.end());

  std::set<std::vector<int>> direct;
  for (int mask = 0; mask < 64; ++mask) {
    std::vector<int> b(6);
    for (int i = 0; i < 6; ++i) b[i] = (mask >> i) & 1;
    const int g[2][2] = {{b[1], b[2]}, {b[4], b[5]}};
    const int ysc[2] = {b[0], b[3]};
    bool ok = true;
    for (int u = 0; u < 2; ++u) ok &= ysc[u] == ((g[u][0] + g[u][1]) > 0);
    for (int d = 0; d < 2; ++d) ok &= g[0][d] + g[1][d] <= 1;
    const int used0 = g[0][0] + g[1][0], used1 = g[0][1] + g[1][1];
    ok &= used0 + used1 <= 1;
    ok &= used1 <= used0;
    if (ok) direct.insert(b);
  }
  EXPECT_EQ(rows, direct);
  // nothing, DER 0 at the first site, DER 0 at the second site
  EXPECT_EQ(rows.size(), 3u);
}

TEST(Repair, NoFailuresOnlySubstationEdge) {
  const auto ff = read_feeder(kData + "/feeder3.json");
  const ResourceLimits lim{1, 1, 3};
  const SaaModel sm = build_saa_mip(ff.feeder, ff.der, std::vector{scenario(ff.feeder, {})}, lim);
  ASSERT_EQ(sm.eff_edges[0], (std::vector<int>{ff.feeder.substation_edge()}));
  const auto sched = oracle::feasible_assignments(sm.model, repair_columns(sm, 0));
  // Only one schedule: the substation edge repaired at K; kline stays 1 until then.
  ASSERT_EQ(sched.size(), 1u);
  for (int k = 0; k <= lim.K; ++k) {
    EXPECT_EQ(sched[0][2 * k], k == lim.K ? 1 : 0);
    EXPECT_EQ(sched[0][2 * k + 1], k == lim.K ? 0 : 1);
  }
}

// Repairing (A,B) at k=2 is impossible because the substation edge takes the
// only crew slot there; leaving (A,B) broken is allowed.
TEST(Repair, OneFailedEdgeSchedules) {
  const auto ff = read_feeder(kData + "/feeder3.json");
  const Feeder& f = ff.feeder;
  const ResourceLimits lim{1, 1, 2};
  const SaaModel sm = build_saa_mip(f, ff.der, std::vector{all_failed(f)}, lim);
  ASSERT_EQ(sm.eff_edges[0].size(), 2u);
  const auto cols = repair_columns(sm, 0);
  const auto sched = oracle::feasible_assignments(sm.model, cols);
  const int ab = edge_between(f, "A", "B");
  // period at which each edge is repaired, -1 for never
  std::set<std::pair<int, int>> got;
  for (const auto& b : sched) {
    int at_ab = -1, at_sub = -1;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const VarKey& key = sm.index.key_of(cols[i]);
      if (key.family != Family::Yline || !b[i]) continue;
      (key.idx[0] == ab ? at_ab : at_sub) = key.idx[1];
    }
    got.insert({at_ab, at_sub});
  }
  EXPECT_EQ(sched.size(), got.size());
  EXPECT_EQ(got, (std::set<std::pair<int, int>>{{1, 2}, {-1, 2}}));
}

TEST(Repair, EachLineRepairedAtMostOnceAndKlineMonotone) {
  const auto f = read_feeder(kData + "/feeder12.json").feeder;
  const auto der = read_feeder(kData + "/feeder12.json").der;
  const ResourceLimits lim{0, 2, 3};
  const SaaModel sm = build_saa_mip(f, der, std::vector{scenario(f, {4})}, lim);
  const auto cols = repair_columns(sm, 0);
  const auto sched = oracle::feasible_assignments(sm.model, cols);
  ASSERT_FALSE(sched.empty());
  const int E = static_cast<int>(sm.eff_edges[0].size());
  for (const auto& b : sched) {
    for (int j = 0; j < E; ++j) {
      int repairs = 0;
      for (int k = 0; k <= lim.K; ++k) {
        repairs += b[2 * (k * E + j)];
        if (k > 0) EXPECT_LE(b[2 * (k * E + j) + 1], b[2 * ((k - 1) * E + j) + 1]);
      }
      EXPECT_LE(repairs, 1);
    }
  }
}

TEST(Dispatch, UnplacedDerProducesNothing) {
  const auto ff = read_feeder(kData + "/feeder3.json");
  const Feeder& f = ff.feeder;
  const ResourceLimits lim{1, 1, 2};
  SaaModel sm = build_second_stage(Allocation::empty(f, ff.der), f, ff.der, all_failed(f), lim);
  const int a = *f.node_index("A");
  MipModel& m = sm.model;
  for (int c = 0; c < m.num_columns(); ++c) m.set_cost(c, 0.0);
  m.objective_offset = 0;
  for (int k = 0; k <= lim.K; ++k) {
    m.set_cost(sm.index.at(Family::Pg, {a, 0, k, 0}), -1.0);
    m.set_cost(sm.index.at(Family::Qg, {a, 0, k, 0}), -1.0);
  }
  const auto sol = solve(m);
  ASSERT_EQ(sol.status, MipStatus::Optimal);
  EXPECT_NEAR(sol.objective, 0.0, 1e-9);
  for (int k = 0; k <= lim.K; ++k) {
    EXPECT_NEAR(sol.x[sm.index.at(Family::Pg, {a, 0, k, 0})], 0.0, 1e-9);
    EXPECT_NEAR(sol.x[sm.index.at(Family::Qg, {a, 0, k, 0})], 0.0, 1e-9);
  }
}

TEST(Dispatch, ShedNodeServesNothing) {
  const auto ff = read_feeder(kData + "/feeder3.json");
  const Feeder& f = ff.feeder;
  const ResourceLimits lim{1, 1, 2};
  SaaModel sm = build_second_stage(Allocation::empty(f, ff.der), f, ff.der, scenario(f, {}), lim);
  const int b = *f.node_index("B");
  MipModel& m = sm.model;
  m.fix_column(sm.index.at(Family::Kcc, {b, 2, 0}), 1.0);
  for (int c = 0; c < m.num_columns(); ++c) m.set_cost(c, 0.0);
  m.set_cost(sm.index.at(Family::Lcc, {b, 2, 0}), -1.0);
  const auto sol = solve(m);
  ASSERT_EQ(sol.status, MipStatus::Optimal);
  EXPECT_NEAR(sol.x[sm.index.at(Family::Lcc, {b, 2, 0})], 0.0, 1e-9);
  EXPECT_NEAR(sol.x[sm.index.at(Family::Pc, {b, 2, 0})], 0.0, 1e-9);
  EXPECT_NEAR(sol.x[sm.index.at(Family::Qc, {b, 2, 0})], 0.0, 1e-9);
}

// Island {A} at k=1 with its own DER. By hand: lcc = 1, pg = pc, qg = qc,
// droop gives nu = nu_ref - kq*qg, no flow on the open substation edge.
TEST(Powerflow, TwoNodeIslandHandSolution) {
  const auto ff = two_node();
  const Feeder& f = ff.feeder;
  const ResourceLimits lim{1, 1, 2};
  auto build = [&] {
    SaaModel sm = build_second_stage(allocate_at(f, ff.der, 1, 1), f, ff.der, scenario(f, {}), lim);
    sm.model.fix_column(sm.index.at(Family::Yline, {0, 1, 0}), 0.0);
    return sm;
  };
  const double pc = 0.1, qc = 0.04;
  const double nu = ff.der.nu_ref - ff.der.kq * qc;
  auto fix_hand = [&](SaaModel& sm, double nu_a) {
    auto& m = sm.model;
    const auto& ix = sm.index;
    m.fix_column(ix.at(Family::Kcc, {1, 1, 0}), 0);
    m.fix_column(ix.at(Family::Lcc, {1, 1, 0}), 1);
    m.fix_column(ix.at(Family::Pc, {1, 1, 0}), pc);
    m.fix_column(ix.at(Family::Qc, {1, 1, 0}), qc);
    m.fix_column(ix.at(Family::Pg, {1, 0, 1, 0}), pc);
    m.fix_column(ix.at(Family::Qg, {1, 0, 1, 0}), qc);
    m.fix_column(ix.at(Family::Pt, {1, 1, 0}), 0);
    m.fix_column(ix.at(Family::Qt, {1, 1, 0}), 0);
    m.fix_column(ix.at(Family::P, {0, 1, 0}), 0);
    m.fix_column(ix.at(Family::Q, {0, 1, 0}), 0);
    m.fix_column(ix.at(Family::Nu, {1, 1, 0}), nu_a);
  };
  SaaModel ok = build();
  fix_hand(ok, nu);
  EXPECT_EQ(solve(ok.model).status, MipStatus::Optimal);
  SaaModel off = build();
  fix_hand(off, nu - 0.01);
  EXPECT_EQ(solve(off.model).status, MipStatus::Infeasible);
}

TEST(Powerflow, ClosedLineVoltageDropIsEquality) {
  const auto ff = two_node();
  const Feeder& f = ff.feeder;
  SaaModel sm = build_second_stage(Allocation::empty(f, ff.der), f, ff.der, scenario(f, {}), {1, 1, 2});
  const auto sol = solve(sm.model);
  ASSERT_EQ(sol.status, MipStatus::Optimal);
  const auto& ix = sm.index;
  for (int k = 0; k <= 2; ++k) {
    if (sol.x[ix.at(Family::Kline, {0, k, 0})] > 0.5) {
      EXPECT_NEAR(sol.x[ix.at(Family::P, {0, k, 0})], 0.0, 1e-9);
      EXPECT_NEAR(sol.x[ix.at(Family::Q, {0, k, 0})], 0.0, 1e-9);
      continue;
    }
    const double drop = 2 * (0.01 * sol.x[ix.at(Family::P, {0, k, 0})] + 0.01 * sol.x[ix.at(Family::Q, {0, k, 0})]);
    EXPECT_NEAR(sol.x[ix.at(Family::Nu, {1, k, 0})], sol.x[ix.at(Family::Nu, {0, k, 0})] - drop, 1e-9);
  }
}

TEST(Objective, AllServedNoSitesIsZero) {
  const auto ff = read_feeder(kData + "/feeder3.json");
  const SaaModel sm = build_saa_mip(ff.feeder, ff.der, std::vector{scenario(ff.feeder, {})}, {1, 1, 2});
  std::vector<double> x(sm.model.num_columns(), 0.0);
  for (int c = 0; c < sm.model.num_columns(); ++c) {
    if (sm.index.key_of(c).family == Family::Lcc) x[c] = 1.0;
  }
  EXPECT_NEAR(sm.model.objective(x), 0.0, 1e-12);
}

TEST(Objective, AllShedEveryPeriod) {
  const auto ff = read_feeder(kData + "/feeder3.json");
  const Feeder& f = ff.feeder;
  const ResourceLimits lim{1, 1, 2};
  SaaModel sm = build_second_stage(Allocation::empty(f, ff.der), f, ff.der, all_failed(f), lim);
  for (int c = 0; c < sm.model.num_columns(); ++c) {
    if (sm.index.key_of(c).family == Family::Kcc) sm.model.fix_column(c, 1.0);
  }
  double per = 0;
  for (const auto& n : f.nodes) per += n.cost_control + n.cost_shed;
  const auto sol = solve(sm.model);
  ASSERT_EQ(sol.status, MipStatus::Optimal);
  EXPECT_NEAR(sol.objective, (lim.K + 1) * per, 1e-9);
}

TEST(Objective, SixShedLoadsCostOnePeriod) {
  const auto f = read_feeder(kData + "/feeder12.json").feeder;
  int loads = 0;
  for (const auto& n : f.nodes) {
    if (n.pc_max > 0) {
      ++loads;
      EXPECT_EQ(n.cost_shed, 1000);
      EXPECT_EQ(n.cost_control, 100);
    }
  }
  EXPECT_EQ(loads, 6);
  std::vector<double> lcc(f.num_nodes(), 0.0), kcc(f.num_nodes(), 1.0);
  EXPECT_DOUBLE_EQ(period_cost(f, lcc, kcc), 6600.0);
  EXPECT_DOUBLE_EQ(full_shed_cost(f), 6600.0);
}

TEST(Build, EmptyScenarioListThrows) {
  const auto ff = read_feeder(kData + "/feeder3.json");
  EXPECT_THROW(build_saa_mip(ff.feeder, ff.der, std::vector<FailureScenario>{}, {1, 1, 2}), InvalidInput);
}

TEST(Build, DuplicateScenarioKeepsAverage) {
  const auto ff = read_feeder(kData + "/feeder3.json");
  const auto s = all_failed(ff.feeder);
  const auto one = solve(build_saa_mip(ff.feeder, ff.der, std::vector{s}, {1, 1, 2}).model);
  const auto two = solve(build_saa_mip(ff.feeder, ff.der, std::vector{s, s}, {1, 1, 2}).model);
  ASSERT_EQ(one.status, MipStatus::Optimal);
  ASSERT_EQ(two.status, MipStatus::Optimal);
  EXPECT_NEAR(one.objective, two.objective, obj_tol(one.objective));
}

TEST(Build, SingleLoadNodeMatchesEnumeration) {
  for (int G : {0, 1}) {
    const auto ff = two_node();
    const SaaModel sm = build_saa_mip(ff.feeder, ff.der, std::vector{scenario(ff.feeder, {})}, {G, 1, 2});
    const auto mip = solve(sm.model);
    const auto brute = oracle::enumerate_binaries(sm.model);
    ASSERT_EQ(mip.status, MipStatus::Optimal);
    EXPECT_NEAR(mip.objective, brute.best, 1e-6) << "G=" << G;
    // A DER covers the load before reconnection; without one periods 0 and 1
    // pay control cost only (lcc_min is 0, so nothing needs shedding).
    EXPECT_NEAR(mip.objective, G == 1 ? 0.0 : 200.0, 1e-6) << "G=" << G;
  }
}

TEST(Build, ThreeNodeMatchesEnumeration) {
  const auto ff = read_feeder(kData + "/feeder3.json");
  const SaaModel sm = build_saa_mip(ff.feeder, ff.der, std::vector{all_failed(ff.feeder)}, {1, 1, 2});
  const auto mip = solve(sm.model);
  const auto brute = oracle::enumerate_binaries(sm.model);
  ASSERT_EQ(mip.status, MipStatus::Optimal);
  EXPECT_GT(brute.lp_solves, 0);
  EXPECT_NEAR(mip.objective, brute.best, 1e-6);
}

TEST(Build, WarnsWhenHorizonTooShort) {
  const auto ff = read_feeder(kData + "/feeder3.json");
  const SaaModel sm = build_saa_mip(ff.feeder, ff.der, std::vector{all_failed(ff.feeder)}, {1, 1, 1});
  ASSERT_EQ(sm.model.warnings.size(), 1u);
  // Still solvable: (A,B) simply stays broken.
  const auto sol = solve(sm.model);
  ASSERT_EQ(sol.status, MipStatus::Optimal);
  const int ab = edge_between(ff.feeder, "A", "B");
  EXPECT_NEAR(sol.x[sm.index.at(Family::Kline, {ab, 1, 0})], 1.0, 1e-9);
}

TEST(SecondStage, ZeroAllocationAllFailedMatchesEnumeration) {
  const auto ff = read_feeder(kData + "/feeder3.json");
  const Feeder& f = ff.feeder;
  const SaaModel sm = build_second_stage(Allocation::empty(f, ff.der), f, ff.der, all_failed(f), {1, 1, 2});
  const auto mip = solve(sm.model);
  const auto brute = oracle::enumerate_binaries(sm.model);
  ASSERT_EQ(mip.status, MipStatus::Optimal);
  EXPECT_NEAR(mip.objective, brute.best, 1e-6);
  // B is dark until the substation closes at k=2; lcc_min > 0 forces kcc there.
  EXPECT_NEAR(mip.objective, 2 * 1100.0, 1e-6);
}

TEST(SecondStage, NoFailuresCostsOnlyPreReconnectionPeriods) {
  const auto ff = read_feeder(kData + "/feeder3.json");
  const Feeder& f = ff.feeder;
  const auto r = evaluate_second_stage(Allocation::empty(f, ff.der), f, ff.der, scenario(f, {}), {1, 1, 3});
  ASSERT_TRUE(r.solved);
  ASSERT_EQ(r.periods.size(), 4u);
  double shed = 0;
  for (const auto& n : f.nodes) shed += n.cost_control + n.cost_shed;
  // The substation edge closes exactly at K.
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(r.periods[k].cost, shed, 1e-9) << k;
  EXPECT_NEAR(r.periods[3].cost, 0.0, 1e-9);
  EXPECT_NEAR(r.J, 3 * shed, 1e-9);
}

TEST(SecondStage, InvalidAllocationRejected) {
  const auto ff = read_feeder(kData + "/feeder3.json");
  const Feeder& f = ff.feeder;
  Allocation a = Allocation::empty(f, ff.der);
  a.ysc[*f.node_index("B")] = 1;
  EXPECT_THROW(build_second_stage(a, f, ff.der, scenario(f, {}), {1, 1, 2}), ValidationError);
  Allocation b = allocate_at(f, ff.der, *f.node_index("A"), 1);
  EXPECT_THROW(build_second_stage(b, f, ff.der, scenario(f, {}), {0, 1, 2}), ValidationError);
}

TEST(SecondStage, TwelveNodeDerAtDServesCAndD) {
  const auto ff = read_feeder(kData + "/feeder12_all_loads.json");
  const Feeder& f = ff.feeder;
  const FailureScenario s = scenario(f, {edge_between(f, "0", "A"), edge_between(f, "B", "C"), edge_between(f, "D", "E"),
                                         edge_between(f, "D", "I"), edge_between(f, "D", "K")});
  const auto r = evaluate_second_stage(allocate_at(f, ff.der, *f.node_index("D"), 1), f, ff.der, s, {1, 2, 4});
  for (int i = 1; i < f.num_nodes(); ++i) {
    const bool cd = f.nodes[i].name == "C" || f.nodes[i].name == "D";
    EXPECT_NEAR(r.periods[0].lcc[i], cd ? 1.0 : 0.0, 1e-6) << f.nodes[i].name;
  }
}

TEST(Invariants, ColumnCountMatchesClosedForm) {
  for (const char* name : {"feeder3.json", "feeder12.json"}) {
    const auto ff = read_feeder(kData + "/" + name);
    const Feeder& f = ff.feeder;
    const std::vector<FailureScenario> ss{scenario(f, {}), all_failed(f), scenario(f, {1})};
    for (int K : {2, 5}) {
      const SaaModel sm = build_saa_mip(f, ff.der, ss, {1, 1, K});
      EXPECT_EQ(sm.model.num_columns(), expected_columns(f, ff.der, ss, K)) << name << " K=" << K;
      // Counted here family by family.
      const long U = static_cast<long>(f.sites().size()), D = ff.der.count, N = f.num_nodes(), E = f.num_edges();
      long cols = U + U * D;
      for (const auto& s : ss) {
        long eff = 0;
        for (int e = 0; e < E; ++e) eff += s.failed[e] || f.edges[e].from == 0;
        cols += (K + 1) * (2 * eff + 6 * (N - 1) + 2 * U * D + 2 * E + N);
      }
      EXPECT_EQ(sm.model.num_columns(), cols);
    }
  }
}

TEST(Invariants, RegistryIsABijection) {
  const auto ff = read_feeder(kData + "/feeder12.json");
  const Feeder& f = ff.feeder;
  const SaaModel sm = build_saa_mip(f, ff.der, std::vector{all_failed(f), scenario(f, {2})}, {2, 2, 7});
  ASSERT_EQ(static_cast<int>(sm.index.size()), sm.model.num_columns());
  std::set<std::string> names;
  for (int c = 0; c < sm.model.num_columns(); ++c) {
    const VarKey& k = sm.index.key_of(c);
    EXPECT_EQ(var_name(k), sm.model.column(c).name);
    names.insert(sm.model.column(c).name);
    const bool binary = k.family == Family::Ysc || k.family == Family::Ygc || k.family == Family::Yline ||
                        k.family == Family::Kline || k.family == Family::Kcc;
    EXPECT_EQ(sm.model.column(c).integer, binary);
    if (binary) {
      EXPECT_EQ(sm.model.column(c).lb, 0.0);
      EXPECT_EQ(sm.model.column(c).ub, 1.0);
    }
  }
  EXPECT_EQ(static_cast<int>(names.size()), sm.model.num_columns());
  EXPECT_EQ(var_name(VarIndex::key(Family::P, {3, 2, 1})), "P[3,2,1]");
}

TEST(Invariants, RecordedBigMIsUsedInRows) {
  const auto ff = read_feeder(kData + "/feeder3.json");
  const SaaModel sm = build_saa_mip(ff.feeder, ff.der, std::vector{all_failed(ff.feeder)}, {1, 1, 2});
  const auto& m = sm.model;
  const auto find_row = [&](const std::string& n) {
    for (int r = 0; r < m.num_rows(); ++r) {
      if (m.row(r).name == n) return r;
    }
    return -1;
  };
  const int kl = sm.index.at(Family::Kline, {0, 1, 0});
  const int g = sm.index.at(Family::Ygc, {1, 0});
  const std::map<std::string, std::pair<int, int>> expect{{"p_off_hi[0,1,0]", {kl, 0}},
                                                          {"q_off_hi[0,1,0]", {kl, 1}},
                                                          {"vdrop_hi[0,1,0]", {kl, 2}},
                                                          {"droop_hi[1,0,1,0]", {g, 3}}};
  const double L[4] = {m.big_m.at("L_f"), m.big_m.at("L_q"), -m.big_m.at("L_v"), m.big_m.at("L_droop")};
  for (const auto& [row, cv] : expect) {
    const int r = find_row(row);
    ASSERT_GE(r, 0) << row;
    bool seen = false;
    for (const auto& t : m.triplets()) {
      if (t.row == r && t.col == cv.first) {
        EXPECT_DOUBLE_EQ(t.value, L[cv.second]) << row;
        seen = true;
      }
    }
    EXPECT_TRUE(seen) << row;
  }
}

TEST(Invariants, ScenarioSeparable) {
  const auto ff = read_feeder(kData + "/feeder3.json");
  const Feeder& f = ff.feeder;
  const std::vector<FailureScenario> ss{all_failed(f), scenario(f, {1}), scenario(f, {})};
  const ResourceLimits lim{1, 1, horizon_K(f, ss, 1)};
  for (const Allocation& a : {Allocation::empty(f, ff.der), allocate_at(f, ff.der, *f.node_index("A"), 1)}) {
    SaaModel sm = build_saa_mip(f, ff.der, ss, lim);
    for (int i : sm.sites) {
      sm.model.fix_column(sm.index.at(Family::Ysc, {i}), a.ysc[i]);
      for (int d = 0; d < ff.der.count; ++d) sm.model.fix_column(sm.index.at(Family::Ygc, {i, d}), a.ygc[i][d]);
    }
    const auto joint = solve(sm.model);
    ASSERT_EQ(joint.status, MipStatus::Optimal);
    double sum = 0;
    for (int i : sm.sites) sum += f.nodes[i].site_cost * a.ysc[i];
    for (const auto& s : ss) sum += evaluate_second_stage(a, f, ff.der, s, lim).J / ss.size();
    EXPECT_NEAR(joint.objective, sum, 1e-6 * std::max(1.0, sum));
  }
}

TEST(Invariants, DoublingBigMLeavesOptimumUnchanged) {
  for (const char* name : {"feeder3.json", "feeder12_all_loads.json"}) {
    const auto ff = read_feeder(kData + "/" + name);
    const Feeder& f = ff.feeder;
    const std::vector<FailureScenario> ss{scenario(f, {0, 1})};
    const ResourceLimits lim{1, 2, horizon_K(f, ss, 2)};
    const auto base = solve(build_saa_mip(f, ff.der, ss, lim).model);
    const SaaModel doubled = build_saa_mip(f, ff.der, ss, lim, {2.0, 0.5, 1.5});
    const SaaModel single = build_saa_mip(f, ff.der, ss, lim);
    for (const auto& [k, v] : single.model.big_m) EXPECT_DOUBLE_EQ(doubled.model.big_m.at(k), 2 * v) << k;
    const auto twice = solve(doubled.model);
    ASSERT_EQ(base.status, MipStatus::Optimal);
    ASSERT_EQ(twice.status, MipStatus::Optimal);
    EXPECT_LT(std::abs(base.objective - twice.objective), 1e-6 * std::max(1.0, std::abs(base.objective))) << name;
  }
}
