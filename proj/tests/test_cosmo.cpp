#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lrcone/cosmo.hpp"
#include "lrcone/lattice.hpp"
#include "lrcone/velocity.hpp"

using namespace lrcone;

namespace {

constexpr double kE = std::numbers::e;

double linearized(const HorizonModel& m, double ti, double tf) {
  return kE * m.couplings.light_speed() * m.D_in * ((tf - ti) - 0.5 * m.alpha * (tf * tf - ti * ti));
}

}  // namespace

TEST(Branching, Values) {
  for (auto b : {Branching::paper, Branching::graph}) {
    EXPECT_EQ(branching_factor(2, b), 8);
    EXPECT_EQ(branching_factor(1, b), 0);
    EXPECT_EQ(branching_factor(2.0, b), 8.0);
  }
  EXPECT_EQ(branching_factor(3, Branching::paper), 24);
  EXPECT_EQ(branching_factor(3, Branching::graph), 16);
  EXPECT_THROW(branching_factor(0, Branching::paper), std::invalid_argument);
  EXPECT_THROW(branching_factor(0.5, Branching::graph), std::invalid_argument);
  EXPECT_THROW(parse_branching("cubic"), std::invalid_argument);
}

TEST(Branching, GraphConventionMatchesLatticeDegrees) {
  for (int D : {2, 3, 4}) {
    auto g = build_decorated_lattice({D, 3, Boundary::periodic});
    const auto link = g.central_link(0);
    const auto plaq = g.neighbors(link)[0];
    EXPECT_EQ(static_cast<long long>(g.degree(link) * g.degree(plaq)), branching_factor(D, Branching::graph)) << D;
  }
}

TEST(DimensionVelocity, ReducesToTwoDimensionalResult) {
  EXPECT_NEAR(v_lr_dimension(2, Couplings{}, Branching::paper), kE, 1e-12);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.05, 5.0);
  for (int i = 0; i < 10; ++i) {
    Couplings c{u(rng), u(rng)};
    const double ref = optimize_kappa(c).v_lr;
    EXPECT_NEAR(v_lr_dimension(2, c, Branching::paper), ref, 1e-12 * ref);
    EXPECT_NEAR(v_lr_dimension(2, c, Branching::graph), ref, 1e-12 * ref);
  }
}

TEST(DimensionVelocity, LinearGrowth) {
  Couplings c;
  const double slope = kE * c.light_speed();
  EXPECT_NEAR(v_lr_dimension(1e3, c, Branching::paper) / 1e3 / slope, 1.0, 1e-3);
  EXPECT_NEAR(v_lr_dimension(1e6, c, Branching::paper) / 1e6 / slope, 1.0, 1e-6);
  // v(D)/D = slope sqrt(1 - 1/D) approaches the limit from below.
  double prev = 0;
  for (double D : {2.0, 3.0, 5.0, 10.0, 100.0, 1e4}) {
    const double r = v_lr_dimension(D, c, Branching::paper) / D;
    EXPECT_GT(r, prev);
    EXPECT_LT(r, slope);
    prev = r;
  }
}

TEST(DimensionVelocity, ConventionRatio) {
  Couplings c{1.3, 0.4};
  for (double D : {2.0, 3.0, 10.0, 1e3, 1e5}) {
    const double r = v_lr_dimension(D, c, Branching::paper) / v_lr_dimension(D, c, Branching::graph);
    EXPECT_NEAR(r, std::sqrt(D / 2), 1e-12 * std::sqrt(D / 2));
  }
}

TEST(DimensionVelocity, BelowTwoDimensions) {
  Couplings c;
  EXPECT_THROW(v_lr_dimension(1.5, c, Branching::paper), std::domain_error);
  EXPECT_EQ(v_lr_dimension(1.5, c, Branching::paper, DimensionMode::toy), 0.0);
  EXPECT_EQ(v_lr_dimension(1.0, c, Branching::graph, DimensionMode::toy), 0.0);
  EXPECT_THROW(v_lr_dimension(NAN, c, Branching::paper), std::invalid_argument);
}

TEST(Horizon, EmptyInterval) {
  HorizonModel m;
  EXPECT_EQ(horizon_distance(m, 3, 3), 0.0);
}

TEST(Horizon, MatchesLinearizedClosedForm) {
  HorizonModel m;
  m.D_in = 1e9;
  m.alpha = 0.01;
  for (auto [ti, tf] : {std::pair{0.0, 50.0}, {10.0, 60.0}, {0.0, 1.0}}) {
    const double ref = linearized(m, ti, tf);
    EXPECT_NEAR(horizon_distance(m, ti, tf) / ref, 1.0, 1e-8) << ti << " " << tf;
  }
}

TEST(Horizon, QuadraticCoefficientLinearInAlpha) {
  HorizonModel m;
  m.D_in = 1e9;
  const double tf = 5.0, lin = kE * m.couplings.light_speed() * m.D_in;
  std::vector<double> per_alpha;
  for (double alpha : {0.001, 0.01, 0.1}) {
    m.alpha = alpha;
    const double r = horizon_distance(m, 0, tf);
    const double quad = (lin * tf - r) / (tf * tf);
    per_alpha.push_back(quad / alpha);
  }
  for (double q : per_alpha) EXPECT_NEAR(q / (0.5 * lin), 1.0, 1e-6);
  EXPECT_NEAR(per_alpha[0] / per_alpha[2], 1.0, 1e-6);
}

TEST(Horizon, ConstantDimensionIsLinear) {
  HorizonModel m;
  m.alpha = 0;
  const double v = v_lr_dimension(m.D_in, m.couplings, m.convention);
  auto pts = lightcone_boundary(m, 0, 40, 17);
  for (auto [t, r] : pts) EXPECT_NEAR(r, v * t, 1e-8 * std::max(1.0, v * t));
}

TEST(Horizon, BoundaryMonotone) {
  HorizonModel m;
  auto pts = lightcone_boundary(m, 0, 50, 101);
  ASSERT_EQ(pts.size(), 101u);
  EXPECT_EQ(pts.front().first, 0.0);
  EXPECT_EQ(pts.front().second, 0.0);
  EXPECT_EQ(pts.back().first, 50.0);
  for (std::size_t k = 1; k < pts.size(); ++k) EXPECT_GE(pts[k].second, pts[k - 1].second);
  EXPECT_NEAR(pts.back().second / horizon_distance(m, 0, 50), 1.0, 1e-12);
  // sides bend inward: increments shrink as D falls
  EXPECT_LT(pts[100].second - pts[99].second, pts[1].second - pts[0].second);
}

TEST(Horizon, ToyModeStopsAtTwoDimensions) {
  HorizonModel strict;
  strict.D_in = 8;
  strict.alpha = 0.0625;  // D = 2 at t = 12, D = 1 at t = 14
  HorizonModel toy = strict;
  toy.mode = DimensionMode::toy;
  EXPECT_THROW(horizon_distance(strict, 0, 13), std::domain_error);
  EXPECT_NEAR(horizon_distance(toy, 0, 13.5) / horizon_distance(strict, 0, 12), 1.0, 1e-10);
  EXPECT_THROW(horizon_distance(toy, 0, 14.5), std::domain_error);
  EXPECT_THROW(horizon_distance(strict, 5, 4), std::invalid_argument);
  EXPECT_THROW(lightcone_boundary(strict, 0, 10, 1), std::invalid_argument);
  HorizonModel bad;
  bad.alpha = -1;
  EXPECT_THROW(horizon_distance(bad, 0, 1), std::invalid_argument);
}
