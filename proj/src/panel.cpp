#include "rcv/panel.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "rcv/errors.hpp"

namespace rcv {

std::span<const double> HighFreqPanel::day_prices(int asset, std::size_t day) const {
  const std::size_t width = static_cast<std::size_t>(obs_per_day) + 1;
  return std::span<const double>(log_price.at(static_cast<std::size_t>(asset))).subspan(day * width, width);
}

std::vector<double> HighFreqPanel::day_increments(int asset, std::size_t day) const {
  const auto prices = day_prices(asset, day);
  std::vector<double> out(prices.size() - 1);
  for (std::size_t i = 1; i < prices.size(); ++i) {
    out[i - 1] = prices[i] - prices[i - 1];
  }
  return out;
}

std::vector<double> HighFreqPanel::increments(int asset) const {
  std::vector<double> out;
  out.reserve(days() * static_cast<std::size_t>(obs_per_day));
  for (std::size_t d = 0; d < days(); ++d) {
    const auto day = day_increments(asset, d);
    out.insert(out.end(), day.begin(), day.end());
  }
  return out;
}

void HighFreqPanel::validate() const {
  if (obs_per_day < 1) {
    throw DataError("panel: observations per day must be positive");
  }
  const std::size_t width = static_cast<std::size_t>(obs_per_day) + 1;
  for (int a = 0; a < 2; ++a) {
    const auto& prices = log_price[static_cast<std::size_t>(a)];
    if (prices.size() != days() * width) {
      throw DataError("panel: asset " + assets[static_cast<std::size_t>(a)] + " has " +
                      std::to_string(prices.size()) + " prices, expected " + std::to_string(days() * width));
    }
    for (std::size_t i = 0; i < prices.size(); ++i) {
      if (!std::isfinite(prices[i])) {
        throw DataError("panel: non-finite log-price for asset " + assets[static_cast<std::size_t>(a)] +
                        " at index " + std::to_string(i));
      }
    }
  }
}

std::string synthetic_day_label(std::size_t day) {
  using namespace std::chrono;
  const sys_days start = year{2000} / January / 3;
  const year_month_day ymd{start + days{static_cast<int>(day)}};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace rcv
