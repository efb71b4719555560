#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rcv {

/// Equidistant intraday log-prices for two assets: every day holds n + 1
/// prices on the grid session_start + i * session_seconds / n, i = 0..n.
struct HighFreqPanel {
  std::array<std::string, 2> assets{"X", "Y"};
  int obs_per_day = 0;
  int session_start_seconds = 9 * 3600 + 30 * 60;
  int session_seconds = 23400;
  std::vector<std::string> day_labels;
  // Row-major: day d occupies [d * (n + 1), (d + 1) * (n + 1)).
  std::array<std::vector<double>, 2> log_price;

  std::size_t days() const { return day_labels.size(); }
  /// Sampling interval as a fraction of a day.
  double delta() const { return 1.0 / static_cast<double>(obs_per_day); }

  std::span<const double> day_prices(int asset, std::size_t day) const;
  std::vector<double> day_increments(int asset, std::size_t day) const;
  /// All intraday increments of one asset, day after day (n per day).
  std::vector<double> increments(int asset) const;

  /// Throws DataError on shape mismatches or non-finite prices.
  void validate() const;
};

/// ISO date label for the d-th synthetic day after 2000-01-03.
std::string synthetic_day_label(std::size_t day);

}  // namespace rcv
