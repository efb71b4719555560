#include "rcv/sv_simulator.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "rcv/errors.hpp"

namespace rcv {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double to_open_unit(double p) {
  return std::clamp(p, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

void SimConfig::validate() const {
  require(mean_reversion > 0.0 && std::isfinite(mean_reversion), "mean_reversion: must be positive");
  for (int i = 0; i < 2; ++i) {
    const std::string tag = std::to_string(i + 1);
    require(vol_of_vol[i] > 0.0 && std::isfinite(vol_of_vol[i]), "vol_of_vol_" + tag + ": must be positive");
    require(std::isfinite(drift[i]), "drift_" + tag + ": must be finite");
    require(std::isfinite(log_variance_level[i]), "log_variance_level_" + tag + ": must be finite");
  }
  require(std::abs(leverage) <= 1.0, "leverage: must lie in [-1, 1]");
  require(std::abs(price_shock_correlation) <= 1.0, "price_shock_correlation: must lie in [-1, 1]");
  require(inner_steps_per_day > 0, "inner_steps_per_day: must be positive");
  require(days > 0, "days: must be positive");
  require(obs_per_day > 0, "obs_per_day: must be positive");
  require(inner_steps_per_day % obs_per_day == 0,
          "obs_per_day: " + std::to_string(obs_per_day) + " does not divide inner_steps_per_day " +
              std::to_string(inner_steps_per_day));
}

StationaryLaw stationary_logv_law(double mean_reversion, double level, double vol_of_vol) {
  if (!(mean_reversion > 0.0)) {
    throw DomainError("stationary law: mean reversion must be positive");
  }
  if (!(vol_of_vol >= 0.0)) {
    throw DomainError("stationary law: vol-of-vol must be non-negative");
  }
  return {level, vol_of_vol * vol_of_vol / (2.0 * mean_reversion)};
}

std::array<double, 2> init_joint_logv(const SimConfig& config, PhiloxStream& rng) {
  const auto [u1, u2] = config.copula.sample(rng);
  const boost::math::normal standard;
  std::array<double, 2> out{};
  const std::array<double, 2> u{u1, u2};
  for (int i = 0; i < 2; ++i) {
    const auto law = stationary_logv_law(config.mean_reversion, config.log_variance_level[i], config.vol_of_vol[i]);
    out[i] = law.mean + std::sqrt(law.variance) * boost::math::quantile(standard, u[i]);
  }
  return out;
}

SimPath simulate(const SimConfig& config) {
  config.validate();
  const std::size_t steps = static_cast<std::size_t>(config.inner_steps_per_day) * static_cast<std::size_t>(config.days);
  const double dt = config.inner_step();
  const double sqrt_dt = std::sqrt(dt);
  const double kappa = config.mean_reversion;
  const double decay = std::exp(-kappa * dt);
  const double orth = std::sqrt(1.0 - config.leverage * config.leverage);
  const double cross = config.price_shock_correlation;
  const double cross_orth = std::sqrt(1.0 - cross * cross);
  const bool coupled = config.copula.family() != CopulaFamily::kIndependence &&
                       !(config.copula.family() == CopulaFamily::kGumbel && config.copula.param() == 1.0) &&
                       !(config.copula.family() == CopulaFamily::kClayton && config.copula.param() == 0.0);

  std::array<double, 2> stat_sd{};
  std::array<double, 2> trans_sd{};
  for (int i = 0; i < 2; ++i) {
    stat_sd[i] = config.vol_of_vol[i] / std::sqrt(2.0 * kappa);
    trans_sd[i] = stat_sd[i] * std::sqrt(-std::expm1(-2.0 * kappa * dt));
  }

  SimPath path;
  path.config = config;
  for (int i = 0; i < 2; ++i) {
    path.log_price[i].resize(steps + 1);
    path.variance[i].resize(steps + 1);
    if (config.keep_shocks) {
      path.price_shock[i].resize(steps);
      path.vol_shock[i].resize(steps);
    }
  }

  PhiloxStream init_rng(config.seed, config.replication, stream_tag::kCopulaInit);
  std::array<PhiloxStream, 2> vol_rng{PhiloxStream(config.seed, config.replication, stream_tag::kVolatility),
                                      PhiloxStream(config.seed, config.replication, stream_tag::kVolatility + 1)};
  std::array<PhiloxStream, 2> price_rng{PhiloxStream(config.seed, config.replication, stream_tag::kPrice),
                                        PhiloxStream(config.seed, config.replication, stream_tag::kPrice + 1)};
  PhiloxStream mh_rng(config.seed, config.replication, stream_tag::kMetropolis);

  std::array<double, 2> logv = init_joint_logv(config, init_rng);
  const auto& eta = config.log_variance_level;

  auto copula_log_density = [&](const std::array<double, 2>& lv) {
    const double u = to_open_unit(normal_cdf((lv[0] - eta[0]) / stat_sd[0]));
    const double v = to_open_unit(normal_cdf((lv[1] - eta[1]) / stat_sd[1]));
    return config.copula.log_density(u, v);
  };
  double current_log_c = coupled ? copula_log_density(logv) : 0.0;

  std::array<double, 2> x{0.0, 0.0};
  std::array<double, 2> var{std::exp(logv[0]), std::exp(logv[1])};
  for (int i = 0; i < 2; ++i) {
    path.log_price[i][0] = 0.0;
    path.variance[i][0] = var[i];
  }

  std::size_t accepted = 0;
  for (std::size_t j = 0; j < steps; ++j) {
    std::array<double, 2> zb{vol_rng[0].normal(), vol_rng[1].normal()};
    std::array<double, 2> zp{price_rng[0].normal(), price_rng[1].normal()};
    zp[1] = cross * zp[0] + cross_orth * zp[1];

    std::array<double, 2> proposal{};
    for (int i = 0; i < 2; ++i) {
      const double shock = config.leverage * zb[i] + orth * zp[i];
      x[i] += config.drift[i] * dt + std::sqrt(var[i]) * sqrt_dt * shock;
      proposal[i] = eta[i] + (logv[i] - eta[i]) * decay + trans_sd[i] * zb[i];
      if (config.keep_shocks) {
        path.price_shock[i][j] = shock;
        path.vol_shock[i][j] = zb[i];
      }
    }

    bool accept = true;
    if (coupled) {
      const double proposal_log_c = copula_log_density(proposal);
      const double log_ratio = proposal_log_c - current_log_c;
      accept = log_ratio >= 0.0 || std::log(mh_rng.uniform()) < log_ratio;
      if (accept) current_log_c = proposal_log_c;
    }
    if (accept) {
      logv = proposal;
      var = {std::exp(logv[0]), std::exp(logv[1])};
      ++accepted;
    }
    for (int i = 0; i < 2; ++i) {
      path.log_price[i][j + 1] = x[i];
      path.variance[i][j + 1] = var[i];
    }
  }
  path.acceptance_rate = steps > 0 ? static_cast<double>(accepted) / static_cast<double>(steps) : 1.0;
  return path;
}

HighFreqPanel observe(const SimPath& path, int obs_per_day) {
  const int inner = path.config.inner_steps_per_day;
  if (obs_per_day <= 0 || inner % obs_per_day != 0) {
    throw ConfigError("observe: obs_per_day " + std::to_string(obs_per_day) +
                      " must divide inner_steps_per_day " + std::to_string(inner));
  }
  const std::size_t stride = static_cast<std::size_t>(inner / obs_per_day);
  const std::size_t days = static_cast<std::size_t>(path.config.days);
  const std::size_t n = static_cast<std::size_t>(obs_per_day);

  HighFreqPanel panel;
  panel.obs_per_day = obs_per_day;
  panel.day_labels.reserve(days);
  for (int a = 0; a < 2; ++a) {
    panel.log_price[a].reserve(days * (n + 1));
  }
  for (std::size_t d = 0; d < days; ++d) {
    panel.day_labels.push_back(synthetic_day_label(d));
    for (int a = 0; a < 2; ++a) {
      const std::size_t base = d * static_cast<std::size_t>(inner);
      for (std::size_t i = 0; i <= n; ++i) {
        panel.log_price[a].push_back(path.log_price[a][base + i * stride]);
      }
    }
  }
  return panel;
}

}  // namespace rcv
