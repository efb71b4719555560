#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rcv/panel.hpp"

namespace rcv {

inline constexpr double kNoTruncation = std::numeric_limits<double>::infinity();

struct SpotVolConfig {
  int block_size = 120;
  /// Truncation scale alpha. Unset: data-driven per day from a bipower proxy.
  /// kNoTruncation disables truncation.
  std::optional<double> truncation_scale;
  double truncation_exponent = 0.49;
  /// Diagnostic only: k_n ~ delta^(-block_exponent).
  double block_exponent = 0.5;

  void validate() const;
};

/// Block sizes used in the simulation design: 36, 48, 120 for n = 39, 78, 390;
/// otherwise round(sqrt(n) * 6) capped at n.
int default_block_size(int obs_per_day);

/// alpha * delta^varpi. Returns +inf when alpha is kNoTruncation.
double truncation_threshold(double alpha, double varpi, double delta);

struct BlockEstimate {
  std::size_t first = 0;  // index of the first increment in the window
  std::size_t start = 0;  // time covered, in increments: [start, end)
  std::size_t end = 0;
  double value = 0.0;     // variance per unit time
  int truncated = 0;      // increments removed by the threshold
};

/// Block-averaged, jump-truncated squared increments. Full blocks of k
/// increments tile the sample; a trailing stub shorter than k reuses the
/// last k increments. Throws DataError on short or non-finite input.
std::vector<BlockEstimate> spot_variance_blocks(std::span<const double> increments, int block_size,
                                                double threshold, double delta);

/// alpha = 4 * sqrt(BV), BV = pi/2 * mean(|r_i||r_{i-1}|) / delta, one value per
/// day of `obs_per_day` increments.
std::vector<double> default_truncation_scale(std::span<const double> increments, int obs_per_day, double delta);

struct SpotBlock {
  std::size_t day = 0;
  double start = 0.0;  // in days since the panel start
  double end = 0.0;
  std::array<double, 2> value{};
  std::array<int, 2> truncated{};
};

struct SpotVolPath {
  int obs_per_day = 0;
  int block_size = 0;
  std::size_t days = 0;
  std::vector<SpotBlock> blocks;
  std::vector<std::array<double, 2>> truncation_scale;  // per day and asset

  std::size_t total_truncated(int asset) const;
};

/// Day-by-day estimation; blocks never straddle days. Days are processed in
/// parallel.
SpotVolPath spot_variance_path(const HighFreqPanel& panel, const SpotVolConfig& config);

struct RateReport {
  double d_n = 0.0;
  double d_n_prime = 0.0;
  std::array<double, 4> d_n_terms{};
  std::array<double, 4> d_n_prime_terms{};
  double scaled_error = 0.0;  // sqrt(T) * d_n (r <= 1) or sqrt(T) * d_n' (r > 1)
  bool branch_conditions = false;
  bool satisfied = false;
  std::vector<std::string> failures;
};

inline constexpr double kRateSlack = 0.01;

/// Checks the tuning-rate conditions for jump activity r, volatility jump
/// activity r_tilde, truncation exponent varpi and block exponent gamma at
/// sampling interval delta and span T. Diagnostic only.
RateReport validate_rates(double r, double r_tilde, double varpi, double gamma, double delta, double span);

}  // namespace rcv
