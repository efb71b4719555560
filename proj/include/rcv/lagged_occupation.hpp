#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rcv/occupation.hpp"

namespace rcv {

/// Occupation threshold (x, y); +inf marginalizes a coordinate.
struct OccupationPoint {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const OccupationPoint&) const = default;
};

/// How the lag integral over [0, T^xi] is discretized on the cell grid.
/// kTrapezoid integrates the piecewise-linear lag profile of a
/// piecewise-constant path; kRectangle is the left Riemann sum.
enum class LagQuadrature { kTrapezoid, kRectangle };

struct LagGeometry {
  std::size_t cells = 0;   // N
  double cell_width = 0.0;
  double horizon = 0.0;    // T^xi in days
  std::size_t full_lags = 0;  // L = floor(horizon / width)
  double fraction = 0.0;   // horizon / width - L
  std::size_t window = 0;  // cells averaged per lag, N - L - 1
  /// Integration weight of lag l = 0..L+1, in units of the cell width.
  std::vector<double> lag_weights;
};

/// Throws DomainError unless xi lies in (0, 1/3) and the window is non-empty.
LagGeometry lag_geometry(std::size_t cells, double cell_width, double xi, LagQuadrature rule);

/// Long-run covariance of the occupation indicators at every pair of
/// points, symmetrized over both lag orderings:
///   2 * int_0^{T^xi} { H_t(p, q) - H(p) H(q) } dt.
/// Bit-packed indicators; point pairs are distributed over OpenMP threads.
Eigen::MatrixXd lagged_occupation_covariance(const VolPairSeries& series, std::span<const OccupationPoint> points,
                                             double xi, LagQuadrature rule = LagQuadrature::kTrapezoid);

/// Serial reference: direct comparisons of the series values, no packing.
Eigen::MatrixXd lagged_occupation_covariance_reference(const VolPairSeries& series,
                                                       std::span<const OccupationPoint> points, double xi,
                                                       LagQuadrature rule = LagQuadrature::kTrapezoid);

/// Packed indicator 1{x_t <= p.x, y_t <= p.y} over all cells, with one
/// trailing zero word so that shifted reads never run past the end.
class IndicatorBits {
public:
  IndicatorBits(const VolPairSeries& series, OccupationPoint point);
  std::size_t ones() const { return ones_; }
  /// sum_{s < window} this[s] * other[s + lag]
  std::uint64_t lagged_overlap(const IndicatorBits& other, std::size_t lag, std::size_t window) const;

private:
  std::vector<std::uint64_t> words_;
  std::size_t ones_ = 0;
};

}  // namespace rcv
