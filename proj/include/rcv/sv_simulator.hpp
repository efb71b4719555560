#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "rcv/copula_models.hpp"
#include "rcv/panel.hpp"
#include "rcv/random.hpp"

namespace rcv {

/// Bivariate stochastic-volatility design: each log-variance is a stationary
/// OU process, the pair is tied by a copula at every point in time, and the
/// log-prices are diffusions with leverage.
struct SimConfig {
  std::array<double, 2> drift{0.10, 0.05};
  double mean_reversion = 10.0;
  std::array<double, 2> log_variance_level{std::log(0.05), std::log(0.01)};
  std::array<double, 2> vol_of_vol{3.0, 3.0};
  double leverage = -0.7071067811865476;  // -sqrt(0.5)
  /// Correlation between the two assets' price shocks orthogonal to volatility.
  double price_shock_correlation = 0.0;
  CopulaModel copula = CopulaModel::gumbel(2.0);
  int inner_steps_per_day = 23400;
  int days = 1;
  int obs_per_day = 390;
  std::uint64_t seed = 0;
  std::uint32_t replication = 0;
  /// Record the standardized price and volatility shocks (diagnostics).
  bool keep_shocks = false;

  double inner_step() const { return 1.0 / static_cast<double>(inner_steps_per_day); }
  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct StationaryLaw {
  double mean = 0.0;
  double variance = 0.0;
};

/// Stationary law N(level, vol_of_vol^2 / (2 kappa)) of an OU log-variance.
StationaryLaw stationary_logv_law(double mean_reversion, double level, double vol_of_vol);

/// Draws (log V1, log V2) with the configured copula and stationary margins.
std::array<double, 2> init_joint_logv(const SimConfig& config, PhiloxStream& rng);

struct SimPath {
  SimConfig config;
  // Inner grid t_j = j / N, j = 0..N*T.
  std::array<std::vector<double>, 2> log_price;
  std::array<std::vector<double>, 2> variance;
  // Standardized shocks per inner step, only when config.keep_shocks.
  std::array<std::vector<double>, 2> price_shock;
  std::array<std::vector<double>, 2> vol_shock;
  double acceptance_rate = 1.0;

  std::size_t inner_points() const { return variance[0].size(); }
};

/// Exact OU transitions proposed for each log-variance, accepted jointly by a
/// Metropolis-Hastings step whose invariant law is the copula-linked
/// stationary distribution; Euler steps for the log-prices.
SimPath simulate(const SimConfig& config);

/// Subsamples the inner grid every N / n points. Throws ConfigError unless n
/// divides the inner steps per day.
HighFreqPanel observe(const SimPath& path, int obs_per_day);

}  // namespace rcv
