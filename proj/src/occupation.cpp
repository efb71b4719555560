#include "rcv/occupation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rcv/errors.hpp"

namespace rcv {

void VolPairSeries::validate() const {
  if (x.size() != y.size()) {
    throw DataError("volatility series: coordinate lengths differ");
  }
  if (x.empty()) {
    throw DataError("volatility series: empty");
  }
  if (!(cell_width > 0.0)) {
    throw DataError("volatility series: cell width must be positive");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= 0.0) || !(y[i] >= 0.0)) {
      throw DataError("volatility series: negative or NaN variance at cell " + std::to_string(i));
    }
  }
}

VolPairSeries VolPairSeries::prefix(double duration) const {
  const auto cells = static_cast<std::size_t>(std::floor(duration / cell_width + 1e-9));
  if (cells == 0 || cells > size()) {
    throw DataError("volatility series: prefix duration outside the sample span");
  }
  VolPairSeries out;
  out.cell_width = cell_width;
  out.x.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(cells));
  out.y.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(cells));
  return out;
}

VolPairSeries series_from_spot(const SpotVolPath& path) {
  if (path.blocks.empty()) {
    throw DataError("volatility series: spot variance path has no blocks");
  }
  const double delta = 1.0 / static_cast<double>(path.obs_per_day);
  // Block bounds are multiples of delta; recover them as integers.
  std::size_t cell = 0;
  std::vector<std::pair<std::size_t, std::size_t>> bounds;
  bounds.reserve(path.blocks.size());
  for (const auto& b : path.blocks) {
    const double day_start = static_cast<double>(b.day);
    const auto lo = static_cast<std::size_t>(std::llround((b.start - day_start) / delta));
    const auto hi = static_cast<std::size_t>(std::llround((b.end - day_start) / delta));
    bounds.emplace_back(lo, hi);
    cell = std::gcd(cell, hi - lo);
  }
  VolPairSeries series;
  series.cell_width = static_cast<double>(cell) * delta;
  const std::size_t cells_per_day = static_cast<std::size_t>(path.obs_per_day) / cell;
  series.x.reserve(path.days * cells_per_day);
  series.y.reserve(path.days * cells_per_day);
  for (std::size_t i = 0; i < path.blocks.size(); ++i) {
    const auto [lo, hi] = bounds[i];
    for (std::size_t c = lo / cell; c < hi / cell; ++c) {
      series.x.push_back(path.blocks[i].value[0]);
      series.y.push_back(path.blocks[i].value[1]);
    }
  }
  return series;
}

VolPairSeries true_variance_series(const SimPath& path) {
  const std::size_t n = path.inner_points();
  if (n < 2) {
    throw DataError("volatility series: simulated path has no steps");
  }
  VolPairSeries series;
  series.cell_width = path.config.inner_step();
  series.x.assign(path.variance[0].begin(), path.variance[0].end() - 1);
  series.y.assign(path.variance[1].begin(), path.variance[1].end() - 1);
  return series;
}

Marginal::Marginal(std::span<const double> values) : sorted_(values.begin(), values.end()) {
  if (sorted_.empty()) {
    throw DataError("marginal distribution: empty sample");
  }
  std::sort(sorted_.begin(), sorted_.end());
}

double Marginal::cdf(double level) const {
  const auto count = std::upper_bound(sorted_.begin(), sorted_.end(), level) - sorted_.begin();
  return static_cast<double>(count) / static_cast<double>(sorted_.size());
}

double Marginal::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) {
    throw DomainError("quantile: level must lie in [0, 1]");
  }
  const double n = static_cast<double>(sorted_.size());
  std::size_t lo = 0;
  std::size_t hi = sorted_.size();
  // First index whose right-continuous CDF reaches u.
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    const auto count = std::upper_bound(sorted_.begin(), sorted_.end(), sorted_[mid]) - sorted_.begin();
    if (static_cast<double>(count) / n >= u) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  if (lo == sorted_.size()) {
    return std::numeric_limits<double>::infinity();
  }
  return sorted_[lo];
}

double realized_H(const VolPairSeries& series, double x, double y) {
  series.validate();
  if (x < 0.0 || y < 0.0) {
    throw DomainError("realized_H: thresholds must be non-negative");
  }
  std::size_t count = 0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series.x[i] <= x && series.y[i] <= y) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(series.size());
}

namespace {

// Right-continuous CDF at every sample point, via one sort.
std::vector<double> ranks_as_cdf(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> out(n);
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start;
    while (end < n && values[order[end]] == values[order[start]]) ++end;
    const double f = static_cast<double>(end) / static_cast<double>(n);
    for (std::size_t k = start; k < end; ++k) out[order[k]] = f;
    start = end;
  }
  return out;
}

void check_grid(std::span<const double> grid, const char* name) {
  if (grid.empty()) {
    throw DomainError(std::string("copula grid: empty ") + name + " grid");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0 && grid[i] <= 1.0) || (i > 0 && !(grid[i] > grid[i - 1]))) {
      throw DomainError(std::string("copula grid: ") + name + " grid must be strictly increasing in [0, 1]");
    }
  }
}

}  // namespace

PseudoObservations pseudo_observations(const VolPairSeries& series) {
  series.validate();
  PseudoObservations obs;
  obs.u = ranks_as_cdf(series.x);
  obs.v = ranks_as_cdf(series.y);
  return obs;
}

PseudoObservations fitting_observations(const VolPairSeries& series) {
  PseudoObservations obs = pseudo_observations(series);
  const double n = static_cast<double>(obs.size());
  const double scale = n / (n + 1.0);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    obs.u[i] *= scale;
    obs.v[i] *= scale;
  }
  return obs;
}

EmpiricalCopulaGrid realized_copula(const VolPairSeries& series, std::span<const double> u_grid,
                                    std::span<const double> v_grid) {
  if (series.size() == 0) {
    throw DataError("realized copula: empty series");
  }
  check_grid(u_grid, "u");
  check_grid(v_grid, "v");
  EmpiricalCopulaGrid grid;
  grid.u.assign(u_grid.begin(), u_grid.end());
  grid.v.assign(v_grid.begin(), v_grid.end());
  grid.pseudo = pseudo_observations(series);

  const std::size_t mu = grid.u.size();
  const std::size_t mv = grid.v.size();
  // hist[i][j]: cells whose first dominating grid indices are (i, j); index
  // mu / mv collects cells above the grid.
  std::vector<std::size_t> hist((mu + 1) * (mv + 1), 0);
  for (std::size_t t = 0; t < grid.pseudo.size(); ++t) {
    const auto i = static_cast<std::size_t>(std::lower_bound(grid.u.begin(), grid.u.end(), grid.pseudo.u[t]) -
                                            grid.u.begin());
    const auto j = static_cast<std::size_t>(std::lower_bound(grid.v.begin(), grid.v.end(), grid.pseudo.v[t]) -
                                            grid.v.begin());
    ++hist[i * (mv + 1) + j];
  }
  const double n = static_cast<double>(grid.pseudo.size());
  grid.values.assign(mu * mv, 0.0);
  std::vector<std::size_t> column(mv, 0);
  for (std::size_t i = 0; i < mu; ++i) {
    std::size_t row = 0;
    for (std::size_t j = 0; j < mv; ++j) {
      row += hist[i * (mv + 1) + j];
      column[j] += row;
      grid.values[i * mv + j] = static_cast<double>(column[j]) / n;
    }
  }
  return grid;
}

CopulaCdf empirical_copula_evaluator(PseudoObservations pseudo) {
  pseudo.validate();
  if (pseudo.size() == 0) {
    throw DataError("empirical copula: empty sample");
  }
  return [obs = std::move(pseudo)](double u, double v) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      if (obs.u[i] <= u && obs.v[i] <= v) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(obs.size());
  };
}

std::vector<double> interior_lattice(double step) {
  if (!(step > 0.0 && step < 0.5)) {
    throw DomainError("lattice step must lie in (0, 1/2)");
  }
  // Division keeps k/m correctly rounded, so lattice points match rank/n exactly.
  const auto cells = std::llround(1.0 / step);
  std::vector<double> out(static_cast<std::size_t>(cells - 1));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<double>(i + 1) / static_cast<double>(cells);
  }
  return out;
}

std::vector<double> inference_lattice() { return {0.10, 0.25, 0.50, 0.75, 0.90}; }

std::vector<double> voronoi_weights(std::span<const double> grid) {
  check_grid(grid, "quadrature");
  std::vector<double> w(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double lo = i == 0 ? 0.0 : 0.5 * (grid[i - 1] + grid[i]);
    const double hi = i + 1 == grid.size() ? 1.0 : 0.5 * (grid[i] + grid[i + 1]);
    w[i] = hi - lo;
  }
  return w;
}

std::vector<double> voronoi_weights_2d(std::span<const double> u_grid, std::span<const double> v_grid) {
  const auto wu = voronoi_weights(u_grid);
  const auto wv = voronoi_weights(v_grid);
  std::vector<double> w(wu.size() * wv.size());
  for (std::size_t i = 0; i < wu.size(); ++i) {
    for (std::size_t j = 0; j < wv.size(); ++j) {
      w[i * wv.size() + j] = wu[i] * wv[j];
    }
  }
  return w;
}

double rmse_vs_target(const EmpiricalCopulaGrid& estimate, const CopulaCdf& target) {
  const auto w = voronoi_weights_2d(estimate.u, estimate.v);
  double sum = 0.0;
  for (std::size_t i = 0; i < estimate.u.size(); ++i) {
    for (std::size_t j = 0; j < estimate.v.size(); ++j) {
      const double diff = estimate.at(i, j) - target(estimate.u[i], estimate.v[j]);
      sum += w[i * estimate.v.size() + j] * diff * diff;
    }
  }
  return std::sqrt(sum);
}

double rmse_between(const EmpiricalCopulaGrid& a, const EmpiricalCopulaGrid& b) {
  if (a.u != b.u || a.v != b.v) {
    throw DomainError("rmse: estimates are on different grids");
  }
  const auto w = voronoi_weights_2d(a.u, a.v);
  double sum = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) {
    const double diff = a.values[k] - b.values[k];
    sum += w[k] * diff * diff;
  }
  return std::sqrt(sum);
}

std::vector<ContourSegment> contour_segments(const EmpiricalCopulaGrid& grid, double level) {
  std::vector<ContourSegment> out;
  const std::size_t mu = grid.u.size();
  const std::size_t mv = grid.v.size();
  auto interp = [&](std::size_t i0, std::size_t j0, std::size_t i1, std::size_t j1) {
    const double a = grid.at(i0, j0);
    const double b = grid.at(i1, j1);
    const double t = a == b ? 0.5 : (level - a) / (b - a);
    return ContourPoint{grid.u[i0] + t * (grid.u[i1] - grid.u[i0]), grid.v[j0] + t * (grid.v[j1] - grid.v[j0])};
  };
  for (std::size_t i = 0; i + 1 < mu; ++i) {
    for (std::size_t j = 0; j + 1 < mv; ++j) {
      // Corners counter-clockwise: (i,j), (i+1,j), (i+1,j+1), (i,j+1).
      const std::array<std::pair<std::size_t, std::size_t>, 4> corner{
          {{i, j}, {i + 1, j}, {i + 1, j + 1}, {i, j + 1}}};
      std::vector<ContourPoint> crossings;
      for (std::size_t e = 0; e < 4; ++e) {
        const auto [ai, aj] = corner[e];
        const auto [bi, bj] = corner[(e + 1) % 4];
        const bool above_a = grid.at(ai, aj) >= level;
        const bool above_b = grid.at(bi, bj) >= level;
        if (above_a != above_b) {
          crossings.push_back(interp(ai, aj, bi, bj));
        }
      }
      for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
        out.push_back({level, crossings[k], crossings[k + 1]});
      }
    }
  }
  return out;
}

}  // namespace rcv
