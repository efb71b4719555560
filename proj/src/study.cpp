#include "rcv/study.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numbers>
#include <numeric>

#include "rcv/errors.hpp"

namespace rcv {

namespace {

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd mean_sd(std::span<const double> x) {
  MeanSd out;
  if (x.empty()) return out;
  out.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  if (x.size() > 1) {
    double ss = 0.0;
    for (double v : x) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
  }
  return out;
}

SimConfig replication_config(const StudyDesign& design, int days, int replication) {
  SimConfig config = design.base;
  config.days = days;
  config.replication = static_cast<std::uint32_t>(replication);
  return config;
}

void check_design(const StudyDesign& design) {
  if (design.replications < 1) throw ConfigError("replications: must be positive");
}

void rethrow_first(const std::vector<std::string>& errors) {
  for (const auto& e : errors) {
    if (!e.empty()) throw NumericalError(e);
  }
}

}  // namespace

VolPairSeries realized_series(const SimPath& path, int obs_per_day) {
  SpotVolConfig spot;
  spot.block_size = default_block_size(obs_per_day);
  return series_from_spot(spot_variance_path(observe(path, obs_per_day), spot));
}

std::uint64_t replication_seed(std::uint64_t seed, std::uint32_t replication) {
  // splitmix64 finalizer over the combined key
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(replication) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

const RmseRow& RmseStudy::find(const std::string& estimator, int obs_per_day, int days) const {
  for (const auto& row : rows) {
    if (row.estimator == estimator && row.obs_per_day == obs_per_day && row.days == days) return row;
  }
  throw DomainError("rmse study: no row for " + estimator + " n=" + std::to_string(obs_per_day) +
                    " T=" + std::to_string(days));
}

RmseStudy rmse_study(const StudyDesign& design, std::span<const int> obs_per_day, std::span<const int> spans,
                     double grid_step) {
  check_design(design);
  if (spans.empty()) throw ConfigError("spans: at least one span is required");
  const int longest = *std::max_element(spans.begin(), spans.end());
  const std::vector<double> grid = interior_lattice(grid_step);
  const CopulaCdf target = design.base.copula.cdf_evaluator();

  // Column 0 holds the empirical copula, column 1 + i the realized copula at obs_per_day[i].
  const std::size_t columns = obs_per_day.size() + 1;
  const std::size_t cells = columns * spans.size();
  const auto reps = static_cast<std::size_t>(design.replications);
  std::vector<double> rmse(reps * cells, 0.0);
  std::vector<std::string> errors(reps);

#pragma omp parallel for schedule(dynamic, 1)
  for (int m = 0; m < design.replications; ++m) {
    const auto r = static_cast<std::size_t>(m);
    try {
      const SimPath path = simulate(replication_config(design, longest, m));
      std::vector<VolPairSeries> series;
      series.push_back(true_variance_series(path));
      for (int n : obs_per_day) series.push_back(realized_series(path, n));
      for (std::size_t c = 0; c < columns; ++c) {
        for (std::size_t s = 0; s < spans.size(); ++s) {
          const VolPairSeries sample = series[c].prefix(static_cast<double>(spans[s]));
          rmse[r * cells + c * spans.size() + s] = rmse_vs_target(realized_copula(sample, grid, grid), target);
        }
      }
    } catch (const std::exception& e) {
      errors[r] = "replication " + std::to_string(m) + ": " + e.what();
    }
  }
  rethrow_first(errors);

  RmseStudy out;
  for (std::size_t c = 0; c < columns; ++c) {
    for (std::size_t s = 0; s < spans.size(); ++s) {
      std::vector<double> values(reps);
      for (std::size_t r = 0; r < reps; ++r) values[r] = rmse[r * cells + c * spans.size() + s];
      const MeanSd stats = mean_sd(values);
      RmseRow row;
      row.estimator = c == 0 ? "empirical" : "realized";
      row.obs_per_day = c == 0 ? 0 : obs_per_day[c - 1];
      row.days = spans[s];
      row.rmse = stats.mean;
      row.sd = stats.sd;
      row.replications = design.replications;
      out.rows.push_back(row);
    }
  }
  return out;
}

PivotStudy pivot_study(const StudyDesign& design, int obs_per_day, int days, std::span<const double> levels,
                       const AvarCOptions& options) {
  check_design(design);
  std::vector<OccupationPoint> points;
  for (double u : levels) points.push_back({u, u});
  const auto reps = static_cast<std::size_t>(design.replications);
  const std::size_t m_points = points.size();
  std::vector<double> z(reps * m_points, 0.0);
  std::vector<char> usable(reps, 0);
  std::vector<std::string> errors(reps);

#pragma omp parallel for schedule(dynamic, 1)
  for (int m = 0; m < design.replications; ++m) {
    const auto r = static_cast<std::size_t>(m);
    try {
      const SimPath path = simulate(replication_config(design, days, m));
      const VolPairSeries series = realized_series(path, obs_per_day);
      const GridCovariance cov = avar_C(series, points, options);
      if (cov.has_nonpositive_diagonal()) continue;
      for (std::size_t k = 0; k < m_points; ++k) {
        const std::array<double, 1> u{points[k].x};
        const double estimate = realized_copula(series, u, u).values.front();
        const double truth = design.base.copula.cdf(points[k].x, points[k].y);
        const auto i = static_cast<Eigen::Index>(k);
        z[r * m_points + k] = std::sqrt(series.span()) * (estimate - truth) / std::sqrt(cov.matrix(i, i));
      }
      usable[r] = 1;
    } catch (const std::exception& e) {
      errors[r] = "replication " + std::to_string(m) + ": " + e.what();
    }
  }
  rethrow_first(errors);

  PivotStudy out;
  out.replications = design.replications;
  out.obs_per_day = obs_per_day;
  out.days = days;
  for (std::size_t k = 0; k < m_points; ++k) {
    PivotPoint point;
    point.u = points[k].x;
    point.v = points[k].y;
    for (std::size_t r = 0; r < reps; ++r) {
      if (usable[r]) point.z.push_back(z[r * m_points + k]);
    }
    const MeanSd stats = mean_sd(point.z);
    point.mean = stats.mean;
    point.sd = stats.sd;
    out.points.push_back(std::move(point));
  }
  out.skipped = static_cast<int>(std::count(usable.begin(), usable.end(), 0));
  return out;
}

double RejectionRow::rate(double level) const {
  if (p_values.empty()) return 0.0;
  const auto rejected = std::count_if(p_values.begin(), p_values.end(), [&](double p) { return p <= level; });
  return static_cast<double>(rejected) / static_cast<double>(p_values.size());
}

RejectionRow rejection_study(const StudyDesign& design, const GofScenario& scenario, std::span<const double> u_grid,
                             std::span<const double> v_grid, const GofOptions& options) {
  check_design(design);
  const auto reps = static_cast<std::size_t>(design.replications);
  std::vector<double> p(reps, -1.0);
  std::vector<std::string> errors(reps);

#pragma omp parallel for schedule(dynamic, 1)
  for (int m = 0; m < design.replications; ++m) {
    const auto r = static_cast<std::size_t>(m);
    try {
      SimConfig config = replication_config(design, scenario.days, m);
      config.copula = scenario.truth;
      const SimPath path = simulate(config);
      const VolPairSeries series = realized_series(path, scenario.obs_per_day);
      GofOptions local = options;
      local.seed = replication_seed(options.seed, static_cast<std::uint32_t>(m));
      p[r] = gof_test(series, u_grid, v_grid, scenario.null_model, local).p_value;
    } catch (const NumericalError& e) {
      errors[r] = e.what();  // degenerate covariance: counted, not fatal
    } catch (const std::exception& e) {
      errors[r] = std::string("fatal: ") + e.what();
    }
  }
  for (const auto& e : errors) {
    if (e.rfind("fatal: ", 0) == 0) throw NumericalError(e.substr(7));
  }

  RejectionRow row;
  row.label = scenario.label;
  row.days = scenario.days;
  row.obs_per_day = scenario.obs_per_day;
  row.replications = design.replications;
  for (double value : p) {
    if (value >= 0.0) {
      row.p_values.push_back(value);
    } else {
      ++row.failed;
    }
  }
  return row;
}

double CoverageStudy::coverage() const {
  const int usable = replications - failed;
  return usable > 0 ? static_cast<double>(covered) / static_cast<double>(usable) : 0.0;
}

CoverageStudy band_coverage_study(const StudyDesign& design, int obs_per_day, int days, std::span<const double> u_grid,
                                  std::span<const double> v_grid, double level, int draws, std::uint64_t seed,
                                  const AvarCOptions& options) {
  check_design(design);
  const std::vector<OccupationPoint> points = grid_pairs(u_grid, v_grid);
  std::vector<double> truth;
  for (const auto& p : points) truth.push_back(design.base.copula.cdf(p.x, p.y));

  const auto reps = static_cast<std::size_t>(design.replications);
  std::vector<int> covered(reps, -1);
  std::vector<double> half(reps, 0.0);
  std::vector<std::string> errors(reps);

#pragma omp parallel for schedule(dynamic, 1)
  for (int m = 0; m < design.replications; ++m) {
    const auto r = static_cast<std::size_t>(m);
    try {
      const SimPath path = simulate(replication_config(design, days, m));
      const VolPairSeries series = realized_series(path, obs_per_day);
      const EmpiricalCopulaGrid estimate = realized_copula(series, u_grid, v_grid);
      const GridCovariance cov = avar_C(series, points, options);
      const BandResult band = uniform_band(estimate.values, cov, series.span(), level, draws,
                                           replication_seed(seed, static_cast<std::uint32_t>(m)));
      covered[r] = band.contains(truth) ? 1 : 0;
      half[r] = band.half_width;
    } catch (const NumericalError& e) {
      errors[r] = e.what();
    } catch (const std::exception& e) {
      errors[r] = std::string("fatal: ") + e.what();
    }
  }
  for (const auto& e : errors) {
    if (e.rfind("fatal: ", 0) == 0) throw NumericalError(e.substr(7));
  }

  CoverageStudy out;
  out.replications = design.replications;
  out.level = level;
  for (std::size_t r = 0; r < reps; ++r) {
    if (covered[r] < 0) {
      ++out.failed;
      continue;
    }
    out.covered += covered[r];
    out.half_widths.push_back(half[r]);
  }
  return out;
}

std::vector<DensityRow> density_table(std::span<const double> sample, double lo, double hi, int points) {
  if (sample.size() < 2) throw DomainError("density table: at least two values are required");
  if (points < 2 || !(hi > lo)) throw DomainError("density table: invalid evaluation range");
  const MeanSd stats = mean_sd(sample);
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const auto q = [&](double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double f = pos - static_cast<double>(i);
    return i + 1 < sorted.size() ? sorted[i] * (1.0 - f) + sorted[i + 1] * f : sorted[i];
  };
  const double iqr = q(0.75) - q(0.25);
  double spread = std::min(stats.sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = stats.sd > 0.0 ? stats.sd : 1.0;
  const double bw = 0.9 * spread * std::pow(static_cast<double>(sample.size()), -0.2);
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);

  std::vector<DensityRow> out;
  out.reserve(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    double sum = 0.0;
    for (double s : sample) {
      const double d = (x - s) / bw;
      sum += std::exp(-0.5 * d * d);
    }
    out.push_back({x, norm * sum / (static_cast<double>(sample.size()) * bw), norm * std::exp(-0.5 * x * x)});
  }
  return out;
}

std::vector<QuantileRow> qq_table(std::span<const double> sample) {
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const boost::math::normal standard;
  std::vector<QuantileRow> out;
  out.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(sorted.size());
    out.push_back({p, boost::math::quantile(standard, p), sorted[i]});
  }
  return out;
}

}  // namespace rcv
