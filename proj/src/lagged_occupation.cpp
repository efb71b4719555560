#include "rcv/lagged_occupation.hpp"

#include <bit>
#include <cmath>

#include "rcv/errors.hpp"

namespace rcv {

LagGeometry lag_geometry(std::size_t cells, double cell_width, double xi, LagQuadrature rule) {
  if (!(xi > 0.0 && xi < 1.0 / 3.0)) {
    throw DomainError("long-run covariance: xi must lie in (0, 1/3)");
  }
  if (cells < 2 || !(cell_width > 0.0)) {
    throw DomainError("long-run covariance: series too short");
  }
  LagGeometry g;
  g.cells = cells;
  g.cell_width = cell_width;
  const double span = static_cast<double>(cells) * cell_width;
  g.horizon = std::pow(span, xi);
  const double ratio = g.horizon / cell_width;
  g.full_lags = static_cast<std::size_t>(std::floor(ratio));
  g.fraction = ratio - static_cast<double>(g.full_lags);
  if (g.full_lags + 2 > cells) {
    throw DomainError("long-run covariance: lag horizon T^xi exceeds the sample span");
  }
  g.window = cells - g.full_lags - 1;

  const std::size_t L = g.full_lags;
  const double f = g.fraction;
  g.lag_weights.assign(L + 2, 0.0);
  if (rule == LagQuadrature::kTrapezoid) {
    if (L >= 1) {
      g.lag_weights[0] = 0.5;
      for (std::size_t l = 1; l < L; ++l) g.lag_weights[l] = 1.0;
      g.lag_weights[L] += 0.5;
    }
    // Partial segment [L, L + f] of the linear interpolant.
    g.lag_weights[L] += f * (2.0 - f) / 2.0;
    g.lag_weights[L + 1] += f * f / 2.0;
  } else {
    for (std::size_t l = 0; l < L; ++l) g.lag_weights[l] = 1.0;
    g.lag_weights[L] += f;
  }
  return g;
}

IndicatorBits::IndicatorBits(const VolPairSeries& series, OccupationPoint point) {
  const std::size_t n = series.size();
  words_.assign(n / 64 + 2, 0);
  for (std::size_t t = 0; t < n; ++t) {
    if (series.x[t] <= point.x && series.y[t] <= point.y) {
      words_[t / 64] |= std::uint64_t{1} << (t % 64);
      ++ones_;
    }
  }
}

std::uint64_t IndicatorBits::lagged_overlap(const IndicatorBits& other, std::size_t lag, std::size_t window) const {
  const std::size_t shift_words = lag / 64;
  const unsigned shift_bits = static_cast<unsigned>(lag % 64);
  const std::size_t full = window / 64;
  const unsigned tail = static_cast<unsigned>(window % 64);
  const auto& a = words_;
  const auto& b = other.words_;
  auto shifted = [&](std::size_t k) -> std::uint64_t {
    const std::uint64_t lo = b[k + shift_words];
    if (shift_bits == 0) return lo;
    const std::uint64_t hi = k + shift_words + 1 < b.size() ? b[k + shift_words + 1] : 0;
    return (lo >> shift_bits) | (hi << (64 - shift_bits));
  };
  std::uint64_t count = 0;
  for (std::size_t k = 0; k < full; ++k) {
    count += static_cast<std::uint64_t>(std::popcount(a[k] & shifted(k)));
  }
  if (tail != 0) {
    const std::uint64_t mask = (std::uint64_t{1} << tail) - 1;
    count += static_cast<std::uint64_t>(std::popcount(a[full] & shifted(full) & mask));
  }
  return count;
}

Eigen::MatrixXd lagged_occupation_covariance(const VolPairSeries& series, std::span<const OccupationPoint> points,
                                             double xi, LagQuadrature rule) {
  series.validate();
  const LagGeometry g = lag_geometry(series.size(), series.cell_width, xi, rule);
  const std::size_t m = points.size();

  std::vector<IndicatorBits> bits;
  bits.reserve(m);
  for (const auto& p : points) bits.emplace_back(series, p);

  const double n = static_cast<double>(g.cells);
  const double window = static_cast<double>(g.window);
  std::vector<double> mean(m);
  for (std::size_t i = 0; i < m; ++i) mean[i] = static_cast<double>(bits[i].ones()) / n;

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(m * (m + 1) / 2);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) pairs.emplace_back(i, j);
  }

  Eigen::MatrixXd out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(pairs.size()); ++k) {
    const auto [i, j] = pairs[static_cast<std::size_t>(k)];
    const double centre = mean[i] * mean[j];
    double integral = 0.0;
    for (std::size_t lag = 0; lag < g.lag_weights.size(); ++lag) {
      const double w = g.lag_weights[lag];
      if (w == 0.0) continue;
      const double forward = static_cast<double>(bits[i].lagged_overlap(bits[j], lag, g.window)) / window;
      const double backward =
          i == j ? forward : static_cast<double>(bits[j].lagged_overlap(bits[i], lag, g.window)) / window;
      integral += w * (0.5 * (forward + backward) - centre);
    }
    const double value = 2.0 * g.cell_width * integral;
    out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
    out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = value;
  }
  return out;
}

Eigen::MatrixXd lagged_occupation_covariance_reference(const VolPairSeries& series,
                                                       std::span<const OccupationPoint> points, double xi,
                                                       LagQuadrature rule) {
  series.validate();
  const LagGeometry g = lag_geometry(series.size(), series.cell_width, xi, rule);
  const std::size_t m = points.size();
  auto indicator = [&](std::size_t p, std::size_t t) {
    return series.x[t] <= points[p].x && series.y[t] <= points[p].y ? 1.0 : 0.0;
  };
  std::vector<double> mean(m, 0.0);
  for (std::size_t p = 0; p < m; ++p) {
    for (std::size_t t = 0; t < g.cells; ++t) mean[p] += indicator(p, t);
    mean[p] /= static_cast<double>(g.cells);
  }
  auto lagged = [&](std::size_t p, std::size_t q, std::size_t lag) {
    double sum = 0.0;
    for (std::size_t s = 0; s < g.window; ++s) sum += indicator(p, s) * indicator(q, s + lag);
    return sum / static_cast<double>(g.window);
  };
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t p = 0; p < m; ++p) {
    for (std::size_t q = 0; q < m; ++q) {
      double integral = 0.0;
      for (std::size_t lag = 0; lag < g.lag_weights.size(); ++lag) {
        const double sym = 0.5 * (lagged(p, q, lag) + lagged(q, p, lag));
        integral += g.lag_weights[lag] * (sym - mean[p] * mean[q]);
      }
      out(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = 2.0 * g.cell_width * integral;
    }
  }
  return out;
}

}  // namespace rcv
