#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rcv/copula_models.hpp"
#include "rcv/spot_vol.hpp"
#include "rcv/sv_simulator.hpp"

namespace rcv {

/// Paired variance levels on an equidistant time grid; cell i covers
/// [i * cell_width, (i + 1) * cell_width) in days.
struct VolPairSeries {
  std::vector<double> x;
  std::vector<double> y;
  double cell_width = 1.0;

  std::size_t size() const { return x.size(); }
  double span() const { return static_cast<double>(x.size()) * cell_width; }
  void validate() const;
  /// Leading cells covering [0, duration).
  VolPairSeries prefix(double duration) const;
};

/// Expands piecewise-constant block estimates onto the coarsest common cell
/// grid (the gcd of block lengths within a day).
VolPairSeries series_from_spot(const SpotVolPath& path);

/// True variances on the inner grid, each point standing for the following
/// inner step.
VolPairSeries true_variance_series(const SimPath& path);

/// Time-occupation distribution of one coordinate: right-continuous CDF and
/// its generalized inverse.
class Marginal {
public:
  explicit Marginal(std::span<const double> values);
  double cdf(double level) const;
  /// Smallest attained level with cdf >= u; +inf when no level qualifies.
  double quantile(double u) const;
  std::size_t size() const { return sorted_.size(); }

private:
  std::vector<double> sorted_;
};

/// Share of time with x_t <= x and y_t <= y; +inf marginalizes a coordinate.
double realized_H(const VolPairSeries& series, double x, double y);

/// (F(x_t), G(y_t)) for every cell.
PseudoObservations pseudo_observations(const VolPairSeries& series);

/// Pseudo-observations rescaled by N / (N + 1) so that no coordinate equals 1,
/// for likelihood fitting.
PseudoObservations fitting_observations(const VolPairSeries& series);

struct EmpiricalCopulaGrid {
  std::vector<double> u;
  std::vector<double> v;
  std::vector<double> values;  // row-major, values[i * v.size() + j] = C(u_i, v_j)
  PseudoObservations pseudo;

  double at(std::size_t i, std::size_t j) const { return values[i * v.size() + j]; }
};

/// Time-averaged indicator of the pseudo-observations on a rectangular grid.
EmpiricalCopulaGrid realized_copula(const VolPairSeries& series, std::span<const double> u_grid,
                                    std::span<const double> v_grid);

/// The same statistic on the latent variance path supplied by a simulator.
inline EmpiricalCopulaGrid empirical_oracle_copula(const VolPairSeries& true_series, std::span<const double> u_grid,
                                                   std::span<const double> v_grid) {
  return realized_copula(true_series, u_grid, v_grid);
}

/// Empirical copula of a sample of pseudo-observations as a CDF evaluator.
CopulaCdf empirical_copula_evaluator(PseudoObservations pseudo);

/// {step, 2*step, ..., 1-step}; default 0.01 gives the 99-point lattice.
std::vector<double> interior_lattice(double step = 0.01);
/// {0.10, 0.25, 0.50, 0.75, 0.90}.
std::vector<double> inference_lattice();

/// Length of the Voronoi cell of each point of a sorted grid in [0, 1].
std::vector<double> voronoi_weights(std::span<const double> grid);
/// Product of 1-D Voronoi weights, row-major over (u_i, v_j).
std::vector<double> voronoi_weights_2d(std::span<const double> u_grid, std::span<const double> v_grid);

/// sqrt(sum_ij w_ij (C_hat - C)^2) with Voronoi quadrature weights.
double rmse_vs_target(const EmpiricalCopulaGrid& estimate, const CopulaCdf& target);
double rmse_between(const EmpiricalCopulaGrid& a, const EmpiricalCopulaGrid& b);

struct ContourPoint {
  double u = 0.0;
  double v = 0.0;
};
struct ContourSegment {
  double level = 0.0;
  ContourPoint from;
  ContourPoint to;
};

/// Marching-squares level set of the gridded copula.
std::vector<ContourSegment> contour_segments(const EmpiricalCopulaGrid& grid, double level);

}  // namespace rcv
