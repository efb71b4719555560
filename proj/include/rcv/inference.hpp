#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rcv/copula_models.hpp"
#include "rcv/lagged_occupation.hpp"
#include "rcv/occupation.hpp"

namespace rcv {

inline constexpr double kDefaultXi = 0.30;

/// max(0.05, T^(-1/6)).
double default_bandwidth(double span);

enum class CovarianceKind { kAvarG, kGamma, kAvarC };
std::string to_string(CovarianceKind kind);

/// Covariance of the limit process at a set of points. For kAvarC the points
/// are (u, v) grid pairs, for kAvarG they are occupation thresholds (x, y).
struct GridCovariance {
  CovarianceKind kind = CovarianceKind::kAvarG;
  std::vector<OccupationPoint> points;
  Eigen::MatrixXd matrix;
  double xi = kDefaultXi;
  double bandwidth = 0.0;  // kernel h; 0 when no kernel was used
  /// Gradient [1, -dC/du, -dC/dv] per point (kAvarC only).
  std::vector<std::array<double, 3>> gradients;

  std::size_t size() const { return points.size(); }
  bool has_nonpositive_diagonal() const;
  double asymmetry() const;
};

GridCovariance avar_G(const VolPairSeries& series, std::span<const OccupationPoint> points, double xi = kDefaultXi,
                      LagQuadrature rule = LagQuadrature::kTrapezoid);

/// Every (u_i, v_j), row-major.
std::vector<OccupationPoint> grid_pairs(std::span<const double> u_grid, std::span<const double> v_grid);

enum class KernelType { kEpanechnikov, kBiweight };

/// Product kernel K(x, y) = k(x) k(y) with k supported on [-1, 1].
class ProductKernel {
public:
  explicit ProductKernel(KernelType type = KernelType::kEpanechnikov) : type_(type) {}
  KernelType type() const { return type_; }
  double profile(double x) const;
  /// int_{-1}^{x} k(s) ds
  double profile_cdf(double x) const;
  double operator()(double x, double y) const { return profile(x) * profile(y); }

private:
  KernelType type_;
};

/// Kernel smoothers over equally weighted pseudo-observations.
class KernelCopulaEstimator {
public:
  /// Throws DomainError unless h lies in (0, 0.5).
  KernelCopulaEstimator(PseudoObservations obs, double h, ProductKernel kernel = ProductKernel{});

  double density(double u, double v) const;
  /// Exact integral of the density estimate over w in [0, v] (resp. [0, u]),
  /// clipped to [0, 1].
  double partial_u(double u, double v) const;
  double partial_v(double u, double v) const;
  double bandwidth() const { return h_; }

private:
  double partial(const std::vector<double>& a, const std::vector<double>& b, double x, double y) const;

  PseudoObservations obs_;
  double h_;
  ProductKernel kernel_;
};

double copula_density_kernel(const PseudoObservations& obs, double u, double v, double h,
                             ProductKernel kernel = ProductKernel{});
double partial_derivative_u(const PseudoObservations& obs, double u, double v, double h,
                            ProductKernel kernel = ProductKernel{});
double partial_derivative_v(const PseudoObservations& obs, double u, double v, double h,
                            ProductKernel kernel = ProductKernel{});

struct AvarCOptions {
  double xi = kDefaultXi;
  std::optional<double> bandwidth;  // default_bandwidth(T) when empty
  ProductKernel kernel{};
  LagQuadrature rule = LagQuadrature::kTrapezoid;
};

/// Plug-in covariance of the realized copula at the given (u, v) points.
GridCovariance avar_C(const VolPairSeries& series, std::span<const OccupationPoint> grid,
                      const AvarCOptions& options = {});

/// g_k' Gamma_kl g_l for one pair of points from the 3x3 block Gamma_kl.
double contract_gradient(const std::array<double, 3>& g_k, const Eigen::Matrix3d& block,
                         const std::array<double, 3>& g_l);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// C +- z_{1-(1-level)/2} sqrt(avar / T), clipped to [0, 1].
Interval pointwise_ci(double estimate, double avar, double span, double level);

/// Nearest positive semidefinite matrix by eigenvalue clipping at zero,
/// plus a 1e-12 ridge.
Eigen::MatrixXd repair_psd(const Eigen::MatrixXd& matrix);

struct BandResult {
  std::vector<OccupationPoint> points;
  std::vector<double> estimate;
  std::vector<double> lower;
  std::vector<double> upper;
  double quantile = 0.0;
  double half_width = 0.0;
  double level = 0.95;
  int draws = 0;
  std::uint64_t seed = 0;

  bool contains(std::span<const double> truth) const;
};

inline constexpr int kMinBandDraws = 1000;

/// Simultaneous band from the supremum of B Gaussian draws with the repaired
/// covariance. Draw b uses its own counter stream.
BandResult uniform_band(std::span<const double> estimate, const GridCovariance& cov, double span, double level,
                        int draws, std::uint64_t seed);

/// T * sum w (C_hat - C_0)^2. Throws DomainError when weights do not sum to 1.
double gof_statistic(std::span<const double> estimate, std::span<const double> null_values,
                     std::span<const double> weights, double span);
double gof_statistic(const EmpiricalCopulaGrid& estimate, const CopulaCdf& null_cdf, std::span<const double> weights,
                     double span);

/// Positive eigenvalues of W^(1/2) Gamma W^(1/2), descending.
std::vector<double> mixture_eigenvalues(const Eigen::MatrixXd& gamma, std::span<const double> weights);

/// Share of B draws of sum pi_k chi2_1 at or above `statistic`.
double mixture_p_value(std::span<const double> eigenvalues, double statistic, int draws, std::uint64_t seed);

struct GofOptions {
  double xi = kDefaultXi;
  std::optional<double> bandwidth;
  ProductKernel kernel{};
  LagQuadrature rule = LagQuadrature::kTrapezoid;
  int draws = 5000;
  std::uint64_t seed = 0;
  /// Fit the null family by MLE and test against the fitted member.
  bool composite = false;
  /// With a composite null: test on the leading T^eta days, fit on all of them.
  std::optional<double> split_exponent;
};

struct GofResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::vector<double> eigenvalues;
  std::string null_description;
  int draws = 0;
  std::uint64_t seed = 0;
  double span = 0.0;  // days entering the statistic
  std::optional<MleFit> fit;
  std::vector<OccupationPoint> points;
  std::vector<double> estimate;
  std::vector<double> null_values;
};

GofResult gof_test(const VolPairSeries& series, std::span<const double> u_grid, std::span<const double> v_grid,
                   const CopulaModel& null_model, const GofOptions& options);
/// Fixed null CDF; the composite flag is rejected.
GofResult gof_test(const VolPairSeries& series, std::span<const double> u_grid, std::span<const double> v_grid,
                   const CopulaCdf& null_cdf, const std::string& description, const GofOptions& options);

}  // namespace rcv
