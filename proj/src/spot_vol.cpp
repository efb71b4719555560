#include "rcv/spot_vol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rcv/errors.hpp"

namespace rcv {

void SpotVolConfig::validate() const {
  if (block_size < 2) {
    throw ConfigError("block_size: must be at least 2");
  }
  if (!(truncation_exponent > 0.0 && truncation_exponent < 0.5)) {
    throw ConfigError("truncation_exponent: must lie in (0, 1/2)");
  }
  if (truncation_scale && !(*truncation_scale > 0.0)) {
    throw ConfigError("truncation_scale: must be positive");
  }
  if (!(block_exponent > 0.0 && block_exponent < 1.0)) {
    throw ConfigError("block_exponent: must lie in (0, 1)");
  }
}

int default_block_size(int obs_per_day) {
  switch (obs_per_day) {
    case 39:
      return 36;
    case 78:
      return 48;
    case 390:
      return 120;
    default:
      break;
  }
  const int k = static_cast<int>(std::lround(6.0 * std::sqrt(static_cast<double>(obs_per_day))));
  return std::clamp(k, 2, std::max(2, obs_per_day));
}

double truncation_threshold(double alpha, double varpi, double delta) {
  if (!(alpha > 0.0)) throw DomainError("truncation threshold: alpha must be positive");
  if (!(varpi > 0.0 && varpi < 0.5)) throw DomainError("truncation threshold: varpi must lie in (0, 1/2)");
  if (!(delta > 0.0)) throw DomainError("truncation threshold: delta must be positive");
  if (std::isinf(alpha)) return kNoTruncation;
  return alpha * std::pow(delta, varpi);
}

std::vector<BlockEstimate> spot_variance_blocks(std::span<const double> increments, int block_size,
                                                double threshold, double delta) {
  const std::size_t k = static_cast<std::size_t>(block_size);
  if (block_size < 1 || increments.size() < k) {
    throw DataError("spot variance: " + std::to_string(increments.size()) + " increments is fewer than block size " +
                    std::to_string(block_size));
  }
  for (std::size_t i = 0; i < increments.size(); ++i) {
    if (!std::isfinite(increments[i])) {
      throw DataError("spot variance: non-finite increment at index " + std::to_string(i));
    }
  }
  const double scale = 1.0 / (static_cast<double>(k) * delta);
  auto estimate = [&](std::size_t first) {
    BlockEstimate block;
    block.first = first;
    double sum = 0.0;
    for (std::size_t j = first; j < first + k; ++j) {
      const double r = increments[j];
      if (std::abs(r) <= threshold) {
        sum += r * r;
      } else {
        ++block.truncated;
      }
    }
    block.value = sum * scale;
    return block;
  };

  const std::size_t full = increments.size() / k;
  std::vector<BlockEstimate> out;
  out.reserve(full + 1);
  for (std::size_t b = 0; b < full; ++b) {
    BlockEstimate block = estimate(b * k);
    block.start = b * k;
    block.end = (b + 1) * k;
    out.push_back(block);
  }
  if (full * k < increments.size()) {
    BlockEstimate stub = estimate(increments.size() - k);
    stub.start = full * k;
    stub.end = increments.size();
    out.push_back(stub);
  }
  return out;
}

std::vector<double> default_truncation_scale(std::span<const double> increments, int obs_per_day, double delta) {
  const std::size_t n = static_cast<std::size_t>(obs_per_day);
  if (obs_per_day < 2 || increments.size() < n || increments.size() % n != 0) {
    throw DataError("truncation scale: need whole days of at least two increments");
  }
  std::vector<double> alphas;
  alphas.reserve(increments.size() / n);
  for (std::size_t day = 0; day < increments.size() / n; ++day) {
    const auto r = increments.subspan(day * n, n);
    double sum = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      sum += std::abs(r[i]) * std::abs(r[i - 1]);
    }
    const double bipower = std::numbers::pi / 2.0 * sum / static_cast<double>(n - 1) / delta;
    if (!(bipower > 0.0) || !std::isfinite(bipower)) {
      throw DataError("truncation scale: day " + std::to_string(day) + " has a zero bipower proxy");
    }
    alphas.push_back(4.0 * std::sqrt(bipower));
  }
  return alphas;
}

std::size_t SpotVolPath::total_truncated(int asset) const {
  std::size_t total = 0;
  for (const auto& b : blocks) total += static_cast<std::size_t>(b.truncated[static_cast<std::size_t>(asset)]);
  return total;
}

SpotVolPath spot_variance_path(const HighFreqPanel& panel, const SpotVolConfig& config) {
  config.validate();
  panel.validate();
  const int n = panel.obs_per_day;
  if (n < config.block_size) {
    throw DataError("spot variance: block size " + std::to_string(config.block_size) + " exceeds the " +
                    std::to_string(n) + " increments per day");
  }
  const double delta = panel.delta();
  const std::size_t days = panel.days();

  SpotVolPath path;
  path.obs_per_day = n;
  path.block_size = config.block_size;
  path.days = days;
  path.truncation_scale.resize(days);

  std::vector<std::vector<SpotBlock>> per_day(days);
  std::vector<std::string> errors(days);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t di = 0; di < static_cast<std::ptrdiff_t>(days); ++di) {
    const auto d = static_cast<std::size_t>(di);
    try {
      std::array<std::vector<BlockEstimate>, 2> asset_blocks;
      for (int a = 0; a < 2; ++a) {
        const auto increments = panel.day_increments(a, d);
        double alpha = 0.0;
        if (config.truncation_scale) {
          alpha = *config.truncation_scale;
        } else {
          alpha = default_truncation_scale(increments, n, delta).front();
        }
        path.truncation_scale[d][static_cast<std::size_t>(a)] = alpha;
        const double threshold = truncation_threshold(alpha, config.truncation_exponent, delta);
        asset_blocks[static_cast<std::size_t>(a)] = spot_variance_blocks(increments, config.block_size, threshold, delta);
      }
      auto& blocks = per_day[d];
      blocks.resize(asset_blocks[0].size());
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        blocks[b].day = d;
        blocks[b].start = static_cast<double>(d) + static_cast<double>(asset_blocks[0][b].start) * delta;
        blocks[b].end = static_cast<double>(d) + static_cast<double>(asset_blocks[0][b].end) * delta;
        for (std::size_t a = 0; a < 2; ++a) {
          blocks[b].value[a] = asset_blocks[a][b].value;
          blocks[b].truncated[a] = asset_blocks[a][b].truncated;
        }
      }
    } catch (const std::exception& e) {
      errors[d] = "day " + panel.day_labels[d] + ": " + e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw DataError(e);
  }
  for (auto& blocks : per_day) {
    path.blocks.insert(path.blocks.end(), blocks.begin(), blocks.end());
  }
  return path;
}

RateReport validate_rates(double r, double r_tilde, double varpi, double gamma, double delta, double span) {
  if (!(r >= 0.0 && r <= 2.0)) throw DomainError("validate_rates: r must lie in [0, 2]");
  if (!(r_tilde >= 0.0 && r_tilde <= 2.0)) throw DomainError("validate_rates: r_tilde must lie in [0, 2]");
  if (!(varpi > 0.0 && varpi < 0.5)) throw DomainError("validate_rates: varpi must lie in (0, 1/2)");
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("validate_rates: gamma must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("validate_rates: delta must lie in (0, 1)");
  if (!(span > 0.0)) throw DomainError("validate_rates: span must be positive");

  const double iota = kRateSlack;
  RateReport report;
  const double shared2 = std::pow(delta, gamma / 2.0 - iota);
  const double shared3 = std::pow(delta, (1.0 - gamma) / 2.0 - iota);
  const double shared4 = std::pow(delta, (1.0 - gamma) / (1.0 + r_tilde) - iota);
  report.d_n_terms = {std::pow(delta, gamma - 1.0 + (2.0 - r) * varpi), shared2, shared3, shared4};
  const double prime_first = r > 0.0 ? std::pow(delta, gamma / r - (1.0 - varpi) - iota)
                                      : 0.0;  // no jumps: the truncation term vanishes
  report.d_n_prime_terms = {prime_first, shared2, shared3, shared4};
  for (int i = 0; i < 4; ++i) {
    report.d_n += report.d_n_terms[i];
    report.d_n_prime += report.d_n_prime_terms[i];
  }

  auto check = [&](bool ok, const std::string& name) {
    if (!ok) report.failures.push_back(name);
    return ok;
  };
  bool branch = true;
  if (r > 1.0) {
    branch &= check((r - 1.0) / r < varpi, "(r-1)/r < varpi");
    branch &= check(varpi < 0.5, "varpi < 1/2");
    branch &= check(r * (1.0 - varpi) < gamma, "r(1-varpi) < gamma");
    branch &= check(gamma < 1.0, "gamma < 1");
  } else {
    branch &= check(varpi > 0.0 && varpi < 0.5, "0 < varpi < 1/2");
    branch &= check(1.0 - (2.0 - r) * varpi < gamma, "1-(2-r)varpi < gamma");
    branch &= check(gamma < 1.0, "gamma < 1");
  }
  if (r_tilde > 0.0) {
    branch &= check((1.0 - gamma) / (1.0 + r_tilde) > 0.0, "(1-gamma)/(1+r_tilde) > 0");
  }
  report.branch_conditions = branch;
  report.scaled_error = std::sqrt(span) * (r <= 1.0 ? report.d_n : report.d_n_prime);
  const bool small = check(report.scaled_error < 1.0, r <= 1.0 ? "sqrt(T) d_n < 1" : "sqrt(T) d_n' < 1");
  report.satisfied = branch && small;
  return report;
}

}  // namespace rcv
