#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "stormdn/wind_field.hpp"

using namespace stormdn;

namespace {

StormTrack line_track() {
  StormTrack t;
  t.waypoints = {{0.0, {0.0, 0.0}}, {2.0, {10.0, 0.0}}};
  t.vm_mps = 40.0;
  t.rm_km = 30.0;
  t.b = 1.5;
  t.t1 = 0.0;
  t.t2 = 2.0;
  return t;
}

StormTrack bent_track() {
  StormTrack t = line_track();
  t.waypoints = {{0.0, {0.0, 0.0}}, {1.0, {4.0, 2.0}}, {3.0, {-2.0, 8.0}}};
  t.t2 = 3.0;
  return t;
}

// Straight-line formula evaluated with plain arithmetic.
double holland_oracle(double vm, double rm, double b, double r) {
  const double a = rm / r;
  return vm * std::pow(a, b / 2.0) * std::sqrt(std::exp(1.0 - std::pow(a, b)));
}

}  // namespace

TEST(StormCenter, WaypointTimeReturnsWaypoint) {
  const auto t = bent_track();
  const Point p = storm_center_at(t, 1.0);
  EXPECT_DOUBLE_EQ(p.x, 4.0);
  EXPECT_DOUBLE_EQ(p.y, 2.0);
  const Point last = storm_center_at(t, 3.0);
  EXPECT_DOUBLE_EQ(last.x, -2.0);
  EXPECT_DOUBLE_EQ(last.y, 8.0);
}

TEST(StormCenter, Midpoint) {
  const Point p = storm_center_at(line_track(), 1.0);
  EXPECT_DOUBLE_EQ(p.x, 5.0);
  EXPECT_DOUBLE_EQ(p.y, 0.0);
}

TEST(StormCenter, ThreeWaypointsMatchTwoPointInterpolation) {
  const auto t = bent_track();
  const double w = (1.5 - 1.0) / (3.0 - 1.0);
  const double ex = 4.0 * (1 - w) + -2.0 * w;
  const double ey = 2.0 * (1 - w) + 8.0 * w;
  const Point p = storm_center_at(t, 1.5);
  EXPECT_NEAR(p.x, ex, 1e-14);
  EXPECT_NEAR(p.y, ey, 1e-14);
}

TEST(StormCenter, OutsideSpanThrows) {
  EXPECT_THROW(storm_center_at(line_track(), -0.1), OutOfRange);
  EXPECT_THROW(storm_center_at(line_track(), 2.01), OutOfRange);
}

TEST(Holland, PeakAtRadiusOfMaxWinds) {
  const auto t = line_track();
  EXPECT_DOUBLE_EQ(holland_velocity(t, t.rm_km), t.vm_mps);
}

TEST(Holland, DecaysFarAway) {
  const auto t = line_track();
  double prev = holland_velocity(t, t.rm_km);
  for (double k : {10.0, 1e2, 1e3, 1e4, 1e6}) {
    const double v = holland_velocity(t, k * t.rm_km);
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_LT(prev, 1e-4 * t.vm_mps);
}

TEST(Holland, MatchesScalarOracle) {
  const auto t = line_track();
  // Vm=40, Rm=30, B=1.5, r=60
  const double expect = holland_oracle(40, 30, 1.5, 60);
  EXPECT_NEAR(holland_velocity(t, 60.0), expect, 1e-12);
  EXPECT_NEAR(expect, 32.8595485326, 1e-9);
}

TEST(Holland, SingularAtZero) {
  EXPECT_THROW(holland_velocity(line_track(), 0.0), SingularInput);
}

TEST(Holland, MaximumAtRmAndStrictlyDecreasingBeyond) {
  const auto t = line_track();
  const double peak = holland_velocity(t, t.rm_km);
  double prev = peak;
  for (int i = 1; i <= 5000; ++i) {
    const double r = t.rm_km * (1.0 + 0.002 * i);
    const double v = holland_velocity(t, r);
    EXPECT_LT(v, prev) << "r=" << r;
    prev = v;
  }
  for (int i = 1; i < 1000; ++i) {
    const double r = t.rm_km * 0.001 * i;
    EXPECT_LE(holland_velocity(t, r), peak);
  }
}

TEST(Holland, LinearInVm) {
  auto t = line_track();
  auto t2 = t;
  t2.vm_mps *= 2;
  for (double r : {0.5, 5.0, 30.0, 77.0, 400.0}) {
    EXPECT_NEAR(holland_velocity(t2, r), 2 * holland_velocity(t, r), 1e-12 * holland_velocity(t2, r));
  }
}

TEST(WindField, CellAtCenterUsesClamp) {
  const auto t = line_track();
  std::vector<GridCell> grid{{7, {5.0, 0.0}, 1.0}};
  const auto w = wind_field_at(t, grid, 1.0);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].cell, 7);
  EXPECT_DOUBLE_EQ(w[0].r, 0.0);
  EXPECT_DOUBLE_EQ(w[0].v, holland_velocity(t, kMinStormDistanceKm));
}

TEST(WindField, EquidistantCellsAgree) {
  const auto t = line_track();
  std::vector<GridCell> grid{{0, {5.0, 3.0}, 1.0}, {1, {5.0, -3.0}, 1.0}, {2, {8.0, 0.0}, 1.0}};
  const auto w = wind_field_at(t, grid, 1.0);
  EXPECT_DOUBLE_EQ(w[0].v, w[1].v);
  EXPECT_DOUBLE_EQ(w[0].v, w[2].v);
}

TEST(WindField, GridMatchesPerCellOracle) {
  const auto t = bent_track();
  std::vector<GridCell> grid;
  int h = 0;
  for (int iy = 0; iy < 3; ++iy) {
    for (int ix = 0; ix < 3; ++ix) grid.push_back({h++, {ix + 0.5, iy + 0.5}, 1.0});
  }
  for (double time : {0.0, 0.5, 1.0, 2.25, 3.0}) {
    const auto w = wind_field_at(t, grid, time);
    ASSERT_EQ(w.size(), 9u);
    // Independent center: find the bracketing waypoints by hand.
    double cx, cy;
    if (time <= 1.0) {
      cx = 4.0 * time;
      cy = 2.0 * time;
    } else {
      const double s = (time - 1.0) / 2.0;
      cx = 4.0 + s * (-6.0);
      cy = 2.0 + s * 6.0;
    }
    for (const auto& smp : w) {
      const auto& c = grid[smp.cell];
      const double r = std::sqrt((c.center.x - cx) * (c.center.x - cx) + (c.center.y - cy) * (c.center.y - cy));
      EXPECT_NEAR(smp.r, r, 1e-12);
      EXPECT_NEAR(smp.v, holland_oracle(40, 30, 1.5, std::max(r, 0.1)), 1e-10);
      EXPECT_DOUBLE_EQ(smp.t, time);
    }
  }
}

TEST(WindField, RelabelingCellsDoesNotChangeValues) {
  const auto t = bent_track();
  std::vector<GridCell> a{{0, {0.5, 0.5}, 1.0}, {1, {1.5, 0.5}, 1.0}, {2, {0.5, 1.5}, 1.0}};
  std::vector<GridCell> b{{42, {0.5, 1.5}, 1.0}, {9, {0.5, 0.5}, 1.0}, {3, {1.5, 0.5}, 1.0}};
  const auto wa = wind_field_at(t, a, 1.7);
  const auto wb = wind_field_at(t, b, 1.7);
  EXPECT_DOUBLE_EQ(wa[0].v, wb[1].v);
  EXPECT_DOUBLE_EQ(wa[1].v, wb[2].v);
  EXPECT_DOUBLE_EQ(wa[2].v, wb[0].v);
}

TEST(StormTrack, ValidationListsProblems) {
  StormTrack t;
  t.waypoints = {{1.0, {}}, {1.0, {}}};
  try {
    t.validate();
    FAIL();
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("strictly increasing"), std::string::npos);
    EXPECT_NE(msg.find("vm"), std::string::npos);
    EXPECT_NE(msg.find("t2"), std::string::npos);
  }
}

TEST(StormHours, HourlySamplesBelowDeparture) {
  StormTrack t = line_track();
  t.t1 = 0;
  t.t2 = 24;
  const auto h = storm_hours(t);
  ASSERT_EQ(h.size(), 24u);
  EXPECT_DOUBLE_EQ(h.front(), 0.0);
  EXPECT_DOUBLE_EQ(h.back(), 23.0);
}
