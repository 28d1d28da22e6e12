#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "lrcone/velocity.hpp"
#include "oracles.hpp"

using namespace lrcone;

namespace {

constexpr double kE = std::numbers::e;

const DpWalkCounts& counts() {
  static const DpWalkCounts dp(256, 45);
  return dp;
}

const VelocityReport& headline() {
  static const VelocityReport rep = measure_velocity(VelocityConfig{}, counts());
  return rep;
}

}  // namespace

TEST(Kappa, OptimumIsOne) {
  auto k = optimize_kappa(Couplings{});
  EXPECT_NEAR(k.kappa_star, 1.0, 1e-9);
  EXPECT_NEAR(k.objective_min, kE, 1e-9);
  EXPECT_NEAR(k.v_lr, kE, 1e-12);
  EXPECT_NEAR(optimize_kappa(Couplings{1, 1}).v_lr, 2 * kE, 1e-12);
  EXPECT_NEAR(optimize_kappa(Couplings{1, 1, 1, 1, 2}).v_lr, 2 * std::sqrt(2.0) * kE, 1e-12);
}

TEST(Kappa, ObjectiveUnimodal) {
  const double step = 0.01;
  std::vector<double> f;
  for (double k = 0.1; k <= 5 + 1e-12; k += step) f.push_back(kappa_objective(k));
  auto it = std::min_element(f.begin(), f.end());
  const auto i = static_cast<std::size_t>(it - f.begin());
  EXPECT_GT(i, 0u);
  EXPECT_LT(i + 1, f.size());
  EXPECT_NEAR(0.1 + i * step, 1.0, step);
  for (std::size_t j = 1; j <= i; ++j) EXPECT_LT(f[j], f[j - 1]);
  for (std::size_t j = i + 1; j < f.size(); ++j) EXPECT_GT(f[j], f[j - 1]);
}

TEST(Arrival, ResidualAndOrder) {
  Couplings c;
  BoundOptions precise{.rel_tol = 1e-12};
  for (double eps : {1e-4, 1e-8, 1e-12}) {
    double prev = 0;
    for (int d : {1, 2, 5, 12, 20, 33}) {
      const double t = arrival_time(d, eps, c, counts());
      EXPECT_GT(t, prev) << d << " " << eps;
      prev = t;
      const double b = evaluate_bound(t, d, c, counts(), precise).value;
      EXPECT_LE(std::fabs(b - eps), 1e-6 * eps) << d << " " << eps;
    }
  }
}

TEST(Arrival, Regression) {
  // Frozen from the first run of the bisection against the rel_tol 1e-12 series.
  EXPECT_NEAR(arrival_time(12, 1e-8, Couplings{}, counts()), 5.9043471123836575, 1e-10 * 5.9);
}

TEST(Arrival, Errors) {
  Couplings c;
  EXPECT_THROW(arrival_time(0, 1e-8, c, counts()), std::invalid_argument);
  EXPECT_THROW(arrival_time(3, 0, c, counts()), std::invalid_argument);
  ArrivalOptions tight;
  tight.t_cap = 1.0;
  EXPECT_THROW(arrival_time(30, 1e-8, c, counts(), tight), ThresholdUnreachable);
}

TEST(Fit, RecoversSyntheticCone) {
  const double A = 1, xi = 2, v = 3;
  std::vector<BoundSample> grid;
  for (double t : {0.0, 1.0, 2.5, 4.0})
    for (int d = 5; d <= 20; d += 3) grid.push_back({t, d, 2 * A * std::exp(-(d - v * t) / xi)});
  auto f = fit_lightcone(grid);
  EXPECT_NEAR(f.A, A, 1e-8 * A);
  EXPECT_NEAR(f.xi, xi, 1e-8 * xi);
  EXPECT_NEAR(f.v, v, 1e-8 * v);
  EXPECT_LT(f.residual_rms, 1e-10);

  // Level set B = eps of the same envelope.
  const double eps = 1e-6;
  std::vector<Arrival> arr;
  std::vector<BoundSample> slice;
  for (int d = 5; d <= 20; ++d) arr.push_back({d, (d + xi * std::log(eps / (2 * A))) / v});
  for (int d = 5; d <= 20; ++d) slice.push_back({1.5, d, 2 * A * std::exp(-(d - v * 1.5) / xi)});
  auto line = fit_arrivals(arr);
  EXPECT_NEAR(line.v, v, 1e-8 * v);
  auto g = fit_lightcone(arr, slice, eps);
  EXPECT_NEAR(g.A, A, 1e-8);
  EXPECT_NEAR(g.xi, xi, 1e-8 * xi);
  EXPECT_NEAR(g.v, v, 1e-8 * v);
  EXPECT_EQ(g.window.d_min, 5);
  EXPECT_EQ(g.window.d_max, 20);
}

TEST(Fit, RejectsBadInput) {
  std::vector<Arrival> same{{4, 1}, {4, 2}, {4, 3}, {4, 4}};
  EXPECT_THROW(fit_arrivals(same), std::invalid_argument);
  std::vector<Arrival> few{{4, 1}, {8, 2}, {12, 3}};
  EXPECT_THROW(fit_arrivals(few), std::invalid_argument);
  std::vector<Arrival> narrow{{10, 1}, {11, 2}, {12, 3}, {13, 4}};
  EXPECT_THROW(fit_arrivals(narrow), std::invalid_argument);
  std::vector<Arrival> nan{{4, 1}, {6, NAN}, {8, 3}, {10, 4}};
  EXPECT_THROW(fit_arrivals(nan), std::invalid_argument);

  // A single time cannot separate xi from v.
  std::vector<BoundSample> one_time;
  for (int d = 2; d <= 10; ++d) one_time.push_back({1.0, d, std::exp(-d)});
  EXPECT_THROW(fit_lightcone(one_time), std::invalid_argument);
  one_time[3].value = INFINITY;
  EXPECT_THROW(fit_lightcone(one_time), std::invalid_argument);
}

TEST(Velocity, HeadlineRun) {
  const auto& rep = headline();
  const Couplings c;
  EXPECT_EQ(rep.arrivals.size(), 31u);
  EXPECT_NEAR(rep.kappa.v_lr, kE, 1e-12);
  // The numerical cone sits inside the analytic envelope and outruns c.
  EXPECT_LE(rep.fit.v, rep.kappa.v_lr);
  EXPECT_GE(rep.fit.v, c.light_speed());
  EXPECT_NEAR(rep.ratio_v_over_c, rep.fit.v / c.light_speed(), 1e-15);
  EXPECT_GT(rep.fit.xi, 0);
  EXPECT_GT(rep.fit.A, 0);
  // Local slopes settle as d grows.
  ASSERT_EQ(rep.trend.size(), 3u);
  EXPECT_LT(std::fabs(rep.trend[2].v - rep.trend[1].v), std::fabs(rep.trend[1].v - rep.trend[0].v));
}

TEST(Velocity, ScalesWithSqrtGJ) {
  VelocityConfig strong;
  strong.couplings = Couplings{2, 2};
  auto rep = measure_velocity(strong, counts());
  EXPECT_NEAR(rep.fit.v / headline().fit.v, 4.0, 0.04);
  EXPECT_NEAR(rep.kappa.v_lr / headline().kappa.v_lr, 4.0, 1e-12);
}

TEST(Velocity, PrefactorExcludesOperatorNorms) {
  // Norms 2 and 3 scale B by 6, so eps = 6e-8 reproduces the unit-norm run.
  VelocityConfig cfg;
  cfg.couplings.norm_p = 2;
  cfg.couplings.norm_q = 3;
  cfg.epsilon = 6e-8;
  auto rep = measure_velocity(cfg, counts());
  EXPECT_NEAR(rep.fit.v, headline().fit.v, 1e-9 * headline().fit.v);
  EXPECT_NEAR(rep.fit.xi, headline().fit.xi, 1e-9 * headline().fit.xi);
  EXPECT_NEAR(rep.fit.A, headline().fit.A, 1e-8 * headline().fit.A);
}

TEST(Velocity, ThreadsDoNotChangeResult) {
  VelocityConfig cfg;
  cfg.d_min = 5;
  cfg.d_max = 15;
  auto a = measure_velocity(cfg, counts(), 1);
  auto b = measure_velocity(cfg, counts(), 3);
  for (std::size_t i = 0; i < a.arrivals.size(); ++i) EXPECT_EQ(a.arrivals[i].t, b.arrivals[i].t);
  EXPECT_EQ(a.fit.v, b.fit.v);
}

TEST(Velocity, ThresholdIndependentAtLargeDistance) {
  // Walk counts to order 2400 from the axis formula; the DP table would be
  // needlessly large here.
  const oracle::AxisFormulaCounts formula(2400, 320);
  // formula source agrees with the DP where both exist
  for (int n = 0; n <= 256; n += 2)
    for (int d : {0, 7, 45})
      if (!std::isinf(counts().log_count(n, d))) { ASSERT_NEAR(formula.log_count(n, d), counts().log_count(n, d), 1e-9); }

  VelocityConfig cfg;
  cfg.d_min = 80;
  cfg.d_max = 320;
  cfg.epsilon = 1e-6;
  const double v6 = measure_velocity(cfg, formula).fit.v;
  cfg.epsilon = 1e-10;
  const double v10 = measure_velocity(cfg, formula).fit.v;
  EXPECT_LE(std::fabs(v6 - v10) / v10, 1e-3) << v6 << " " << v10;
}

TEST(Velocity, ConfigErrors) {
  VelocityConfig cfg;
  cfg.d_min = 0;
  EXPECT_THROW(measure_velocity(cfg, counts()), std::invalid_argument);
  cfg.d_min = 10;
  cfg.epsilon = -1;
  EXPECT_THROW(measure_velocity(cfg, counts()), std::invalid_argument);
  cfg.epsilon = 1e-8;
  cfg.d_max = 80;
  EXPECT_THROW(measure_velocity(cfg, counts()), std::out_of_range);
}
