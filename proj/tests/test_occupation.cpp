#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rcv/errors.hpp"
#include "rcv/occupation.hpp"
#include "rcv/random.hpp"

using namespace rcv;

namespace {

VolPairSeries make_series(std::vector<double> x, std::vector<double> y) {
  VolPairSeries s;
  s.x = std::move(x);
  s.y = std::move(y);
  s.cell_width = 1.0;
  return s;
}

VolPairSeries random_series(std::size_t n, std::uint64_t seed) {
  PhiloxStream rng(seed, 0, 0);
  VolPairSeries s;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rng.exponential();
    s.x.push_back(a);
    s.y.push_back(0.5 * a + rng.exponential());
  }
  return s;
}

// Ranks by direct counting, then the time-averaged joint indicator.
double brute_copula(const VolPairSeries& s, double u, double v) {
  const std::size_t n = s.size();
  const double dn = static_cast<double>(n);
  std::size_t hits = 0;
  for (std::size_t t = 0; t < n; ++t) {
    std::size_t rx = 0, ry = 0;
    for (std::size_t r = 0; r < n; ++r) {
      rx += s.x[r] <= s.x[t];
      ry += s.y[r] <= s.y[t];
    }
    hits += static_cast<double>(rx) / dn <= u && static_cast<double>(ry) / dn <= v;
  }
  return static_cast<double>(hits) / dn;
}

}  // namespace

TEST(RealizedH, Examples) {
  const auto s = make_series({1, 2, 3, 4}, {4, 3, 2, 1});
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(realized_H(s, inf, inf), 1.0);
  EXPECT_EQ(realized_H(s, 2.5, 3.5), 0.25);
  EXPECT_EQ(realized_H(s, 3.5, 3.5), 0.5);
  EXPECT_THROW(realized_H(s, -1.0, 1.0), DomainError);
}

TEST(RealizedH, MonotoneWithMarginals) {
  const auto s = random_series(200, 3);
  const Marginal fx(s.x);
  const Marginal gy(s.y);
  const double inf = std::numeric_limits<double>::infinity();
  double prev = 0.0;
  for (double x = 0.0; x < 6.0; x += 0.25) {
    EXPECT_EQ(realized_H(s, x, inf), fx.cdf(x));
    EXPECT_EQ(realized_H(s, inf, x), gy.cdf(x));
    const double h = realized_H(s, x, 2.0);
    EXPECT_GE(h, prev);
    prev = h;
  }
}

TEST(Marginal, GeneralizedInverse) {
  const std::vector<double> values{3, 1, 4, 2};
  const Marginal m(values);
  EXPECT_EQ(m.quantile(0.5), 2.0);
  EXPECT_EQ(m.quantile(0.0), 1.0);
  EXPECT_EQ(m.quantile(1.0), 4.0);
  EXPECT_EQ(m.quantile(0.51), 3.0);
  EXPECT_THROW(m.quantile(1.01), DomainError);
  EXPECT_THROW(m.quantile(-0.1), DomainError);
}

TEST(RealizedCopula, Comonotone) {
  std::vector<double> x{0.7, 0.1, 0.5, 0.9, 0.3, 0.2, 0.8, 0.4, 1.0, 0.6};
  const auto s = make_series(x, x);
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  const auto c = realized_copula(s, grid, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double expected = std::min(std::floor(10 * grid[i] + 1e-9), std::floor(10 * grid[j] + 1e-9)) / 10.0;
      EXPECT_NEAR(c.at(i, j), expected, 1e-15);
    }
  }
  EXPECT_EQ(c.at(10, 10), 1.0);
}

TEST(RealizedCopula, Antimonotone) {
  std::vector<double> x, y;
  for (int i = 0; i < 10; ++i) {
    x.push_back(i);
    y.push_back(10 - i);
  }
  const std::vector<double> half{0.5};
  EXPECT_EQ(realized_copula(make_series(x, y), half, half).values[0], 0.0);
}

TEST(RealizedCopula, MatchesBruteForceRanks) {
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = random_series(10, 100 + seed);
    const auto c = realized_copula(s, grid, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (std::size_t j = 0; j < grid.size(); ++j) EXPECT_EQ(c.at(i, j), brute_copula(s, grid[i], grid[j]));
    }
  }
}

TEST(RealizedCopula, RankInvariance) {
  VolPairSeries s = random_series(300, 9);
  for (auto& v : s.x) v += 1.0;  // keep log levels non-negative
  for (auto& v : s.y) v += 1.0;
  VolPairSeries logged = s;
  for (auto& v : logged.x) v = std::log(v);
  for (auto& v : logged.y) v = std::log(v);
  const auto grid = interior_lattice(0.05);
  const auto a = realized_copula(s, grid, grid);
  const auto b = realized_copula(logged, grid, grid);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.pseudo.u, b.pseudo.u);
  EXPECT_EQ(a.pseudo.v, b.pseudo.v);
}

TEST(RealizedCopula, OracleAgreesWithRealized) {
  const auto s = random_series(100, 5);
  const auto grid = inference_lattice();
  EXPECT_EQ(realized_copula(s, grid, grid).values, empirical_oracle_copula(s, grid, grid).values);
  EXPECT_THROW(realized_copula(VolPairSeries{}, grid, grid), DataError);
}

TEST(RealizedCopula, GridPropertiesAndInversion) {
  const auto s = random_series(400, 11);
  const auto grid = interior_lattice(0.05);
  const auto c = realized_copula(s, grid, grid);
  const double tol = 1e-12;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
      EXPECT_LE(c.at(i, j), c.at(i + 1, j) + tol);
      EXPECT_LE(c.at(i, j), c.at(i, j + 1) + tol);
      EXPECT_GE(c.at(i + 1, j + 1) - c.at(i + 1, j) - c.at(i, j + 1) + c.at(i, j), -tol);
    }
  }
  const Marginal fx(s.x);
  const Marginal gy(s.y);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      EXPECT_EQ(realized_H(s, fx.quantile(grid[i]), gy.quantile(grid[j])), c.at(i, j));
    }
  }
}

TEST(PseudoObservations, UniformRanks) {
  const auto s = random_series(250, 2);
  const auto p = pseudo_observations(s);
  std::vector<double> u = p.u;
  std::sort(u.begin(), u.end());
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_EQ(u[i], static_cast<double>(i + 1) / 250.0);
  const auto f = fitting_observations(s);
  EXPECT_LT(*std::max_element(f.u.begin(), f.u.end()), 1.0);
}

TEST(RmseVsTarget, Examples) {
  const auto grid = interior_lattice();
  const auto s = random_series(500, 1);
  const auto c = realized_copula(s, grid, grid);
  EXPECT_EQ(rmse_between(c, c), 0.0);

  EmpiricalCopulaGrid ind;
  ind.u = grid;
  ind.v = grid;
  for (double u : grid) {
    for (double v : grid) ind.values.push_back(u * v);
  }
  EmpiricalCopulaGrid shifted = ind;
  for (auto& v : shifted.values) v += 0.1;
  EXPECT_NEAR(rmse_vs_target(shifted, [](double u, double v) { return u * v; }), 0.1, 1e-3);

  PhiloxStream rng(17, 0, 0);
  double acc = 0.0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    const double v = rng.uniform();
    const double d = u * v - std::min(u, v);
    acc += d * d;
  }
  const double oracle = std::sqrt(acc / n);
  EXPECT_NEAR(rmse_vs_target(ind, [](double u, double v) { return std::min(u, v); }), oracle, 1e-3);
}

TEST(VoronoiWeights, SumToOne) {
  const auto w = voronoi_weights(inference_lattice());
  const std::vector<double> expected{0.175, 0.2, 0.25, 0.2, 0.175};
  ASSERT_EQ(w.size(), expected.size());
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(w[i], expected[i], 1e-15);
  double total = 0.0;
  for (double x : voronoi_weights_2d(inference_lattice(), inference_lattice())) total += x;
  EXPECT_NEAR(total, 1.0, 1e-15);
}

TEST(SeriesPrefix, Span) {
  const auto s = random_series(100, 4);
  EXPECT_EQ(s.prefix(40.0).size(), 40u);
  EXPECT_THROW(s.prefix(101.0), DataError);
}
