#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "rcv/errors.hpp"
#include "rcv/occupation.hpp"
#include "rcv/sv_simulator.hpp"

using namespace rcv;

namespace {

SimConfig small_config(int days, int inner = 390) {
  SimConfig c;
  c.days = days;
  c.inner_steps_per_day = inner;
  c.obs_per_day = 78;
  c.seed = 99;
  return c;
}

double mean(const std::vector<double>& x) { return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size()); }

double variance(const std::vector<double>& x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a);
  const double mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST(StationaryLaw, Examples) {
  const auto a = stationary_logv_law(10.0, std::log(0.05), 3.0);
  EXPECT_DOUBLE_EQ(a.mean, std::log(0.05));
  EXPECT_NEAR(a.variance, 0.45, 1e-15);
  EXPECT_NEAR(stationary_logv_law(10.0, std::log(0.01), 3.0).variance, 0.45, 1e-15);
  EXPECT_LT(stationary_logv_law(1.0, 0.0, 1e-9).variance, 1e-17);
  EXPECT_THROW(stationary_logv_law(0.0, 0.0, 1.0), DomainError);
}

TEST(InitJointLogv, DependenceAndMargins) {
  SimConfig ind = small_config(1);
  ind.copula = CopulaModel::independence();
  SimConfig gum = small_config(1);
  PhiloxStream r1(5, 0, stream_tag::kCopulaInit);
  PhiloxStream r2(6, 0, stream_tag::kCopulaInit);
  std::vector<double> a, b, c, d;
  for (int i = 0; i < 10000; ++i) {
    const auto x = init_joint_logv(ind, r1);
    a.push_back(x[0]);
    b.push_back(x[1]);
    const auto y = init_joint_logv(gum, r2);
    c.push_back(y[0]);
    d.push_back(y[1]);
  }
  EXPECT_NEAR(correlation(a, b), 0.0, 0.03);
  PseudoObservations p;
  for (std::size_t i = 0; i < c.size(); ++i) p.push_back(c[i], d[i]);
  // Kendall's tau only needs ranks, so the log-variances can stand in.
  EXPECT_NEAR(kendall_tau_sample(p), 0.5, 0.03);
  const double se = std::sqrt(0.45 / 10000.0);
  EXPECT_NEAR(mean(a), std::log(0.05), 3 * se);
  EXPECT_NEAR(variance(a), 0.45, 3 * 0.45 * std::sqrt(2.0 / 10000.0));
}

TEST(Simulate, DeterministicForSeed) {
  const SimConfig c = small_config(20);
  const SimPath a = simulate(c);
  const SimPath b = simulate(c);
  EXPECT_EQ(a.log_price[0], b.log_price[0]);
  EXPECT_EQ(a.variance[1], b.variance[1]);
  SimConfig other = c;
  other.seed = 100;
  EXPECT_NE(simulate(other).variance[0], a.variance[0]);
}

TEST(Simulate, MarginsAndDependence) {
  const SimPath path = simulate(small_config(1000));
  const auto law = stationary_logv_law(10.0, std::log(0.05), 3.0);
  std::vector<double> lv;
  for (double v : path.variance[0]) lv.push_back(std::log(v));
  // Effective sample size from the OU autocorrelation exp(-kappa dt): 2/(kappa) days per independent draw.
  const double n_eff = 1000.0 * 10.0 / 2.0;
  EXPECT_NEAR(mean(lv), law.mean, 3 * std::sqrt(law.variance / n_eff));
  EXPECT_NEAR(variance(lv), law.variance, 3 * law.variance * std::sqrt(2.0 / n_eff));

  PseudoObservations daily;
  for (std::size_t j = 0; j < path.inner_points(); j += 390) daily.push_back(path.variance[0][j], path.variance[1][j]);
  EXPECT_NEAR(kendall_tau_sample(daily), 0.5, 0.05);
  for (double v : path.variance[1]) ASSERT_GT(v, 0.0);
}

TEST(Simulate, UpperTailClustering) {
  SimConfig c = small_config(2000);
  const SimPath path = simulate(c);
  PseudoObservations daily;
  for (std::size_t j = 0; j < path.inner_points(); j += 390) daily.push_back(path.variance[0][j], path.variance[1][j]);
  VolPairSeries s;
  s.x = daily.u;
  s.y = daily.v;
  const auto tc = tail_concentration(empirical_copula_evaluator(pseudo_observations(s)), 0.95);
  EXPECT_GE(tc.upper, 0.05 + 0.2);
}

TEST(Simulate, ConstantVolatility) {
  SimConfig c = small_config(20, 23400);
  c.vol_of_vol = {1e-9, 1e-9};
  c.obs_per_day = 390;
  const SimPath path = simulate(c);
  const HighFreqPanel panel = observe(path, 390);
  double rv = 0.0;
  for (double r : panel.increments(0)) rv += r * r;
  // Average daily realized variance; a single day has relative sd sqrt(2/390).
  EXPECT_NEAR(rv / 20.0, 0.05, 0.05 * 0.05);
}

TEST(Simulate, Leverage) {
  SimConfig c = small_config(43, 23400);
  c.keep_shocks = true;
  const SimPath path = simulate(c);
  ASSERT_GE(path.price_shock[0].size(), 1'000'000u);
  EXPECT_NEAR(correlation(path.price_shock[0], path.vol_shock[0]), -std::sqrt(0.5), 0.03);
  EXPECT_NEAR(correlation(path.price_shock[1], path.vol_shock[1]), -std::sqrt(0.5), 0.03);
}

TEST(Observe, Subsampling) {
  SimConfig c = small_config(3, 23400);
  const SimPath path = simulate(c);
  const HighFreqPanel p39 = observe(path, 39);
  ASSERT_EQ(p39.log_price[0].size(), 3u * 40u);
  for (std::size_t d = 0; d < 3; ++d) {
    for (std::size_t i = 0; i <= 39; ++i) {
      EXPECT_EQ(p39.log_price[0][d * 40 + i], path.log_price[0][d * 23400 + i * 600]);
    }
  }
  SimConfig small = small_config(50);
  const SimPath sp = simulate(small);
  const HighFreqPanel ident = observe(sp, 390);
  EXPECT_EQ(ident.increments(1).size(), 50u * 390u);
  std::size_t prices = 0;
  const HighFreqPanel p78 = observe(sp, 78);
  // nT + 1 distinct grid prices: days share their boundary price.
  prices = p78.increments(0).size() + 1;
  EXPECT_EQ(prices, 3901u);
  EXPECT_THROW(observe(sp, 77), ConfigError);
}

TEST(SimConfigTest, Validation) {
  SimConfig c = small_config(10);
  c.mean_reversion = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config(10);
  c.leverage = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config(10);
  c.obs_per_day = 7;
  EXPECT_THROW(c.validate(), ConfigError);
}
