#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "rcv/errors.hpp"
#include "rcv/random.hpp"
#include "rcv/spot_vol.hpp"
#include "rcv/sv_simulator.hpp"

using namespace rcv;

TEST(TruncationThreshold, Examples) {
  EXPECT_NEAR(truncation_threshold(1.0, 0.49, 1.0 / 390), std::pow(1.0 / 390, 0.49), 1e-15);
  EXPECT_NEAR(truncation_threshold(1.0, 0.49, 1.0 / 390), 0.0537, 1e-4);
  EXPECT_TRUE(std::isinf(truncation_threshold(kNoTruncation, 0.49, 1.0 / 390)));
  EXPECT_GT(truncation_threshold(1.0, 0.49, 1.0 / 39), truncation_threshold(1.0, 0.49, 1.0 / 390));
  EXPECT_THROW(truncation_threshold(-1.0, 0.49, 0.1), DomainError);
  EXPECT_THROW(truncation_threshold(1.0, 0.5, 0.1), DomainError);
}

TEST(SpotVarianceBlocks, ConstantIncrements) {
  const std::vector<double> r(12, 0.3);
  for (const auto& b : spot_variance_blocks(r, 4, kNoTruncation, 1.0)) EXPECT_NEAR(b.value, 0.09, 1e-15);
}

TEST(SpotVarianceBlocks, JumpExcluded) {
  std::vector<double> r(7, 0.01);
  r.push_back(5.0);
  r.insert(r.end(), 4, 0.01);
  const auto blocks = spot_variance_blocks(r, 4, 0.05, 1.0);
  ASSERT_EQ(blocks.size(), 3u);
  EXPECT_NEAR(blocks[0].value, 4 * 1e-4 / 4, 1e-18);
  EXPECT_NEAR(blocks[1].value, 3 * 1e-4 / 4, 1e-18);
  EXPECT_EQ(blocks[1].truncated, 1);
  EXPECT_EQ(blocks[0].truncated, 0);
}

TEST(SpotVarianceBlocks, TailStubUsesLastWindow) {
  std::vector<double> r;
  for (int i = 1; i <= 10; ++i) r.push_back(0.1 * i);
  const auto blocks = spot_variance_blocks(r, 4, kNoTruncation, 0.5);
  ASSERT_EQ(blocks.size(), 3u);  // ceil(10 / 4)
  EXPECT_EQ(blocks[2].start, 8u);
  EXPECT_EQ(blocks[2].end, 10u);
  EXPECT_EQ(blocks[2].first, 6u);
  double s = 0.0;
  for (int i = 6; i < 10; ++i) s += r[i] * r[i];
  EXPECT_NEAR(blocks[2].value, s / (4 * 0.5), 1e-14);
  EXPECT_THROW(spot_variance_blocks(std::vector<double>(3, 0.1), 4, kNoTruncation, 1.0), DataError);
  std::vector<double> bad(8, 0.1);
  bad[5] = std::nan("");
  try {
    spot_variance_blocks(bad, 4, kNoTruncation, 1.0);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find('5'), std::string::npos);
  }
}

TEST(SpotVarianceBlocks, BlockSumIdentityAndMonotonicity) {
  PhiloxStream rng(4, 0, 0);
  std::vector<double> r;
  for (int i = 0; i < 48 * 5; ++i) r.push_back(0.01 * rng.normal() + (i == 100 ? 0.2 : 0.0));
  const double delta = 1.0 / 78;
  double total = 0.0;
  for (double x : r) total += x * x;
  double block_sum = 0.0;
  const auto all = spot_variance_blocks(r, 48, kNoTruncation, delta);
  for (const auto& b : all) block_sum += b.value * 48 * delta;
  EXPECT_NEAR(block_sum, total, 1e-14);

  std::vector<double> previous(all.size(), INFINITY);
  for (double alpha : {1.0, 0.5, 0.2, 0.1, 0.05}) {
    const auto blocks = spot_variance_blocks(r, 48, truncation_threshold(alpha, 0.49, delta), delta);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      EXPECT_LE(blocks[i].value, previous[i]);
      previous[i] = blocks[i].value;
    }
  }
}

TEST(SpotVarianceBlocks, InjectedJump) {
  PhiloxStream rng(8, 0, 0);
  const double delta = 1.0 / 390;
  const double sd = std::sqrt(0.05 * delta);
  std::vector<double> r;
  for (int i = 0; i < 120; ++i) r.push_back(sd * rng.normal());
  const auto alpha = default_truncation_scale(r, 120, delta);
  const double threshold = truncation_threshold(alpha[0], 0.49, delta);
  const double clean = spot_variance_blocks(r, 120, threshold, delta)[0].value;
  std::vector<double> jumped = r;
  jumped[60] += 10 * threshold;
  const double with_trunc = spot_variance_blocks(jumped, 120, threshold, delta)[0].value;
  const double without = spot_variance_blocks(jumped, 120, kNoTruncation, delta)[0].value;
  EXPECT_LT(with_trunc, 2 * clean);
  EXPECT_GT(without, 10 * clean);
}

TEST(DefaultTruncationScale, Calibration) {
  const double delta = 1.0 / 390;
  const double s = 0.01;
  int inside = 0;
  for (int trial = 0; trial < 100; ++trial) {
    PhiloxStream rng(1, static_cast<std::uint32_t>(trial), 0);
    std::vector<double> r;
    for (int i = 0; i < 390; ++i) r.push_back(s * rng.normal());
    const double ratio = default_truncation_scale(r, 390, delta)[0] / std::sqrt(s * s / delta);
    inside += ratio >= 3.2 && ratio <= 4.8;
  }
  EXPECT_EQ(inside, 100);

  std::vector<double> r{0.1, -0.3, 0.2, 0.05, -0.1, 0.4};
  std::vector<double> r2;
  for (double x : r) r2.push_back(2 * x);
  EXPECT_NEAR(default_truncation_scale(r2, 6, 0.1)[0], 2 * default_truncation_scale(r, 6, 0.1)[0], 1e-14);

  const double c = 0.02;
  const std::vector<double> flat{c, -c, c, c, -c};
  const double bv = std::numbers::pi / 2 * c * c / 0.2;
  EXPECT_NEAR(default_truncation_scale(flat, 5, 0.2)[0], 4 * std::sqrt(bv), 1e-14);
  EXPECT_THROW(default_truncation_scale(std::vector<double>(5, 0.0), 5, 0.2), DataError);
}

TEST(SpotVariancePath, ConstantVolatilityOracle) {
  SimConfig c;
  c.days = 10;
  c.inner_steps_per_day = 23400;
  c.vol_of_vol = {1e-9, 1e-9};
  c.seed = 3;
  const SimPath path = simulate(c);
  SpotVolConfig cfg;
  cfg.block_size = 120;
  const SpotVolPath spot = spot_variance_path(observe(path, 390), cfg);
  ASSERT_EQ(spot.blocks.size(), 10u * 4u);  // ceil(390 / 120) per day
  double err = 0.0;
  for (const auto& b : spot.blocks) err += std::abs(b.value[0] - 0.05) / 0.05;
  EXPECT_LT(err / static_cast<double>(spot.blocks.size()), 0.15);
  for (const auto& b : spot.blocks) EXPECT_EQ(b.day, static_cast<std::size_t>(b.start));
}

TEST(SpotVariancePath, UntruncatedSentinel) {
  SimConfig c;
  c.days = 3;
  c.inner_steps_per_day = 390;
  c.seed = 12;
  const HighFreqPanel panel = observe(simulate(c), 78);
  SpotVolConfig cfg;
  cfg.block_size = 48;
  cfg.truncation_scale = kNoTruncation;
  const SpotVolPath spot = spot_variance_path(panel, cfg);
  const auto expected = spot_variance_blocks(panel.day_increments(1, 2), 48, INFINITY, 1.0 / 78);
  ASSERT_EQ(spot.blocks.size(), 3 * expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_EQ(spot.blocks[2 * expected.size() + i].value[1], expected[i].value);
  }
  EXPECT_EQ(spot.total_truncated(0), 0u);
}

TEST(DefaultBlockSize, Table) {
  EXPECT_EQ(default_block_size(39), 36);
  EXPECT_EQ(default_block_size(78), 48);
  EXPECT_EQ(default_block_size(390), 120);
}

TEST(ValidateRates, Examples) {
  const double delta = 1e-4;
  const auto ok = validate_rates(0.4, 0.0, 0.45, 0.5, delta, std::pow(delta, -0.25 + 0.05));
  EXPECT_TRUE(ok.satisfied) << (ok.failures.empty() ? "" : ok.failures.front());

  const auto bad = validate_rates(1.5, 0.0, 0.2, 0.5, delta, 10.0);
  EXPECT_FALSE(bad.satisfied);
  ASSERT_FALSE(bad.failures.empty());
  EXPECT_EQ(bad.failures.front(), "(r-1)/r < varpi");

  // Largest term at these settings: delta^(gamma - 1 + (2 - r) varpi) = delta^0.22.
  const double dominant = std::pow(delta, 0.5 - 1.0 + 1.6 * 0.45);
  EXPECT_NEAR(ok.d_n_terms[0], dominant, 1e-14);
  EXPECT_NEAR(ok.d_n_terms[1], std::pow(delta, 0.25 - 0.01), 1e-15);
  for (double t : ok.d_n_terms) EXPECT_LE(t, dominant);
  EXPECT_THROW(validate_rates(2.5, 0.0, 0.2, 0.5, delta, 10.0), DomainError);
}
