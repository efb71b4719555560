#include "rcv/inference.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <map>

#include "rcv/errors.hpp"
#include "rcv/random.hpp"

namespace rcv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kWeightSumTolerance = 1e-10;
constexpr double kRidge = 1e-12;

double clip01(double x) { return std::clamp(x, 0.0, 1.0); }

void check_bandwidth(double h) {
  if (!(h > 0.0 && h < 0.5)) {
    throw DomainError("kernel bandwidth h must lie in (0, 0.5)");
  }
}

}  // namespace

double default_bandwidth(double span) {
  if (!(span > 0.0)) throw DomainError("default bandwidth: span must be positive");
  return std::max(0.05, std::pow(span, -1.0 / 6.0));
}

std::string to_string(CovarianceKind kind) {
  switch (kind) {
    case CovarianceKind::kAvarG:
      return "avar_G";
    case CovarianceKind::kGamma:
      return "Gamma";
    case CovarianceKind::kAvarC:
      return "avar_C";
  }
  return "unknown";
}

bool GridCovariance::has_nonpositive_diagonal() const {
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    if (!(matrix(i, i) > 0.0)) return true;
  }
  return false;
}

double GridCovariance::asymmetry() const {
  if (matrix.size() == 0) return 0.0;
  return (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
}

GridCovariance avar_G(const VolPairSeries& series, std::span<const OccupationPoint> points, double xi,
                      LagQuadrature rule) {
  GridCovariance out;
  out.kind = CovarianceKind::kAvarG;
  out.points.assign(points.begin(), points.end());
  out.xi = xi;
  out.matrix = lagged_occupation_covariance(series, points, xi, rule);
  return out;
}

std::vector<OccupationPoint> grid_pairs(std::span<const double> u_grid, std::span<const double> v_grid) {
  std::vector<OccupationPoint> out;
  out.reserve(u_grid.size() * v_grid.size());
  for (double u : u_grid) {
    for (double v : v_grid) out.push_back({u, v});
  }
  return out;
}

double ProductKernel::profile(double x) const {
  if (std::abs(x) > 1.0) return 0.0;
  const double s = 1.0 - x * x;
  return type_ == KernelType::kEpanechnikov ? 0.75 * s : 0.9375 * s * s;
}

double ProductKernel::profile_cdf(double x) const {
  if (x <= -1.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (type_ == KernelType::kEpanechnikov) {
    return 0.5 + 0.75 * x - 0.25 * x * x * x;
  }
  const double x3 = x * x * x;
  return 0.5 + 0.9375 * (x - 2.0 * x3 / 3.0 + x3 * x * x / 5.0);
}

KernelCopulaEstimator::KernelCopulaEstimator(PseudoObservations obs, double h, ProductKernel kernel)
    : obs_(std::move(obs)), h_(h), kernel_(kernel) {
  check_bandwidth(h);
  obs_.validate();
  if (obs_.size() == 0) throw DataError("kernel estimator: no pseudo-observations");
}

double KernelCopulaEstimator::density(double u, double v) const {
  double sum = 0.0;
  for (std::size_t t = 0; t < obs_.size(); ++t) {
    const double a = kernel_.profile((obs_.u[t] - u) / h_);
    if (a == 0.0) continue;
    sum += a * kernel_.profile((obs_.v[t] - v) / h_);
  }
  return sum / (static_cast<double>(obs_.size()) * h_ * h_);
}

// (1/(hN)) sum k((a_t - x)/h) int_0^y k((b_t - w)/h)/h dw
double KernelCopulaEstimator::partial(const std::vector<double>& a, const std::vector<double>& b, double x,
                                      double y) const {
  double sum = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    const double weight = kernel_.profile((a[t] - x) / h_);
    if (weight == 0.0) continue;
    sum += weight * (kernel_.profile_cdf(b[t] / h_) - kernel_.profile_cdf((b[t] - y) / h_));
  }
  return clip01(sum / (static_cast<double>(a.size()) * h_));
}

double KernelCopulaEstimator::partial_u(double u, double v) const { return partial(obs_.u, obs_.v, u, v); }
double KernelCopulaEstimator::partial_v(double u, double v) const { return partial(obs_.v, obs_.u, v, u); }

double copula_density_kernel(const PseudoObservations& obs, double u, double v, double h, ProductKernel kernel) {
  return KernelCopulaEstimator(obs, h, kernel).density(u, v);
}

double partial_derivative_u(const PseudoObservations& obs, double u, double v, double h, ProductKernel kernel) {
  return KernelCopulaEstimator(obs, h, kernel).partial_u(u, v);
}

double partial_derivative_v(const PseudoObservations& obs, double u, double v, double h, ProductKernel kernel) {
  return KernelCopulaEstimator(obs, h, kernel).partial_v(u, v);
}

double contract_gradient(const std::array<double, 3>& g_k, const Eigen::Matrix3d& block,
                         const std::array<double, 3>& g_l) {
  double sum = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) sum += g_k[a] * block(a, b) * g_l[b];
  }
  return sum;
}

GridCovariance avar_C(const VolPairSeries& series, std::span<const OccupationPoint> grid,
                      const AvarCOptions& options) {
  series.validate();
  for (const auto& p : grid) {
    if (!(p.x > 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < 1.0)) {
      throw DomainError("avar_C: grid points must lie in (0, 1)^2");
    }
  }
  const double h = options.bandwidth.value_or(default_bandwidth(series.span()));
  check_bandwidth(h);

  const Marginal fx(series.x);
  const Marginal fy(series.y);

  // Each grid point needs the joint point and both marginalized points.
  std::map<std::pair<double, double>, std::size_t> index;
  std::vector<OccupationPoint> unique;
  auto intern = [&](double x, double y) {
    const auto [it, inserted] = index.try_emplace({x, y}, unique.size());
    if (inserted) unique.push_back({x, y});
    return it->second;
  };
  std::vector<std::array<std::size_t, 3>> components(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double x = fx.quantile(grid[k].x);
    const double y = fy.quantile(grid[k].y);
    components[k] = {intern(x, y), intern(x, kInf), intern(kInf, y)};
  }
  const Eigen::MatrixXd gamma = lagged_occupation_covariance(series, unique, options.xi, options.rule);

  const KernelCopulaEstimator smoother(pseudo_observations(series), h, options.kernel);
  GridCovariance out;
  out.kind = CovarianceKind::kAvarC;
  out.points.assign(grid.begin(), grid.end());
  out.xi = options.xi;
  out.bandwidth = h;
  out.gradients.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out.gradients[k] = {1.0, -smoother.partial_u(grid[k].x, grid[k].y), -smoother.partial_v(grid[k].x, grid[k].y)};
  }

  const auto m = static_cast<Eigen::Index>(grid.size());
  out.matrix.resize(m, m);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (std::size_t l = k; l < grid.size(); ++l) {
      Eigen::Matrix3d block;
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          block(a, b) = gamma(static_cast<Eigen::Index>(components[k][a]), static_cast<Eigen::Index>(components[l][b]));
        }
      }
      const double value = contract_gradient(out.gradients[k], block, out.gradients[l]);
      out.matrix(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = value;
      out.matrix(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) = value;
    }
  }
  return out;
}

Interval pointwise_ci(double estimate, double avar, double span, double level) {
  if (!(avar > 0.0)) {
    throw DomainError(
        "pointwise_ci: asymptotic variance is not positive; widen xi or move the grid point away from the "
        "boundary");
  }
  if (!(span > 0.0)) throw DomainError("pointwise_ci: span must be positive");
  if (!(level >= 0.0 && level < 1.0)) throw DomainError("pointwise_ci: level must lie in [0, 1)");
  const boost::math::normal standard;
  const double z = boost::math::quantile(standard, 0.5 + level / 2.0);
  const double half = z * std::sqrt(avar / span);
  return {clip01(estimate - half), clip01(estimate + half)};
}

Eigen::MatrixXd repair_psd(const Eigen::MatrixXd& matrix) {
  const Eigen::MatrixXd sym = 0.5 * (matrix + matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("covariance repair: eigen-decomposition failed");
  }
  const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd out = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  out = 0.5 * (out + out.transpose());
  out.diagonal().array() += kRidge;
  return out;
}

bool BandResult::contains(std::span<const double> truth) const {
  if (truth.size() != lower.size()) {
    throw DomainError("band: truth has " + std::to_string(truth.size()) + " values, band has " +
                      std::to_string(lower.size()));
  }
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (truth[k] < lower[k] || truth[k] > upper[k]) return false;
  }
  return true;
}

BandResult uniform_band(std::span<const double> estimate, const GridCovariance& cov, double span, double level,
                        int draws, std::uint64_t seed) {
  if (draws < kMinBandDraws) {
    throw DomainError("uniform_band: at least " + std::to_string(kMinBandDraws) + " draws are required");
  }
  if (!(level > 0.0 && level < 1.0)) throw DomainError("uniform_band: level must lie in (0, 1)");
  if (!(span > 0.0)) throw DomainError("uniform_band: span must be positive");
  const auto m = static_cast<Eigen::Index>(estimate.size());
  if (cov.matrix.rows() != m || cov.matrix.cols() != m) {
    throw DomainError("uniform_band: covariance does not match the grid");
  }
  const Eigen::LLT<Eigen::MatrixXd> chol(repair_psd(cov.matrix));
  if (chol.info() != Eigen::Success) {
    throw NumericalError("uniform_band: Cholesky factorization failed after PSD repair");
  }
  const Eigen::MatrixXd lower_factor = chol.matrixL();

  std::vector<double> sup(static_cast<std::size_t>(draws));
#pragma omp parallel for schedule(static)
  for (int b = 0; b < draws; ++b) {
    PhiloxStream rng(seed, static_cast<std::uint32_t>(b), stream_tag::kBand);
    Eigen::VectorXd z(m);
    for (Eigen::Index i = 0; i < m; ++i) z(i) = rng.normal();
    sup[static_cast<std::size_t>(b)] = (lower_factor * z).cwiseAbs().maxCoeff();
  }
  std::sort(sup.begin(), sup.end());
  const auto rank = static_cast<std::size_t>(std::ceil(level * static_cast<double>(draws)));

  BandResult out;
  out.points = cov.points;
  out.estimate.assign(estimate.begin(), estimate.end());
  out.quantile = sup[std::clamp<std::size_t>(rank, 1, sup.size()) - 1];
  out.half_width = out.quantile / std::sqrt(span);
  out.level = level;
  out.draws = draws;
  out.seed = seed;
  out.lower.resize(estimate.size());
  out.upper.resize(estimate.size());
  for (std::size_t k = 0; k < estimate.size(); ++k) {
    out.lower[k] = clip01(estimate[k] - out.half_width);
    out.upper[k] = clip01(estimate[k] + out.half_width);
  }
  return out;
}

double gof_statistic(std::span<const double> estimate, std::span<const double> null_values,
                     std::span<const double> weights, double span) {
  if (estimate.size() != null_values.size() || estimate.size() != weights.size()) {
    throw DomainError("gof_statistic: estimate, null values and weights differ in length");
  }
  if (!(span > 0.0)) throw DomainError("gof_statistic: span must be positive");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DomainError("gof_statistic: weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > kWeightSumTolerance) {
    throw DomainError("gof_statistic: weights sum to " + std::to_string(total) + ", expected 1");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < estimate.size(); ++k) {
    const double d = estimate[k] - null_values[k];
    sum += weights[k] * d * d;
  }
  return span * sum;
}

double gof_statistic(const EmpiricalCopulaGrid& estimate, const CopulaCdf& null_cdf, std::span<const double> weights,
                     double span) {
  std::vector<double> null_values;
  null_values.reserve(estimate.values.size());
  for (double u : estimate.u) {
    for (double v : estimate.v) null_values.push_back(null_cdf(u, v));
  }
  return gof_statistic(estimate.values, null_values, weights, span);
}

std::vector<double> mixture_eigenvalues(const Eigen::MatrixXd& gamma, std::span<const double> weights) {
  const auto m = static_cast<Eigen::Index>(weights.size());
  if (gamma.rows() != m || gamma.cols() != m) {
    throw DomainError("mixture eigenvalues: covariance does not match the weights");
  }
  Eigen::VectorXd root(m);
  for (Eigen::Index i = 0; i < m; ++i) root(i) = std::sqrt(weights[static_cast<std::size_t>(i)]);
  Eigen::MatrixXd scaled = root.asDiagonal() * gamma * root.asDiagonal();
  scaled = 0.5 * (scaled + scaled.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("mixture eigenvalues: eigen-decomposition failed");
  }
  const Eigen::VectorXd& values = eig.eigenvalues();
  const double largest = values.cwiseAbs().maxCoeff();
  const double floor = largest * static_cast<double>(m) * std::numeric_limits<double>::epsilon();
  std::vector<double> out;
  for (Eigen::Index i = values.size() - 1; i >= 0; --i) {
    if (values(i) > floor) out.push_back(values(i));
  }
  return out;
}

double mixture_p_value(std::span<const double> eigenvalues, double statistic, int draws, std::uint64_t seed) {
  if (draws < 1) throw DomainError("mixture p-value: draws must be positive");
  if (eigenvalues.empty()) throw DomainError("mixture p-value: no eigenvalues");
  long exceed = 0;
#pragma omp parallel for schedule(static) reduction(+ : exceed)
  for (int b = 0; b < draws; ++b) {
    PhiloxStream rng(seed, static_cast<std::uint32_t>(b), stream_tag::kGof);
    double s = 0.0;
    for (double pi : eigenvalues) {
      const double z = rng.normal();
      s += pi * z * z;
    }
    if (s >= statistic) ++exceed;
  }
  return static_cast<double>(exceed) / static_cast<double>(draws);
}

namespace {

GofResult run_gof(const VolPairSeries& sample, std::span<const double> u_grid, std::span<const double> v_grid,
                  const CopulaCdf& null_cdf, const GofOptions& options) {
  const EmpiricalCopulaGrid estimate = realized_copula(sample, u_grid, v_grid);
  const std::vector<double> weights = voronoi_weights_2d(u_grid, v_grid);

  GofResult out;
  out.points = grid_pairs(u_grid, v_grid);
  out.estimate = estimate.values;
  out.null_values.reserve(out.points.size());
  for (const auto& p : out.points) out.null_values.push_back(null_cdf(p.x, p.y));
  out.span = sample.span();
  out.statistic = gof_statistic(out.estimate, out.null_values, weights, out.span);

  AvarCOptions avar;
  avar.xi = options.xi;
  avar.bandwidth = options.bandwidth;
  avar.kernel = options.kernel;
  avar.rule = options.rule;
  const GridCovariance cov = avar_C(sample, out.points, avar);
  out.eigenvalues = mixture_eigenvalues(cov.matrix, weights);
  if (out.eigenvalues.empty()) {
    throw NumericalError("gof_test: covariance has no positive eigenvalues (degenerate path)");
  }
  out.draws = options.draws;
  out.seed = options.seed;
  out.p_value = mixture_p_value(out.eigenvalues, out.statistic, options.draws, options.seed);
  return out;
}

}  // namespace

GofResult gof_test(const VolPairSeries& series, std::span<const double> u_grid, std::span<const double> v_grid,
                   const CopulaModel& null_model, const GofOptions& options) {
  if (!options.composite) {
    if (options.split_exponent) throw ConfigError("split_exponent: only meaningful with a composite null");
    GofResult out = run_gof(series, u_grid, v_grid, null_model.cdf_evaluator(), options);
    out.null_description = null_model.describe();
    return out;
  }
  const MleFit fit = fit_mle(fitting_observations(series), null_model.family());
  const CopulaModel fitted = fit.model();
  VolPairSeries sample = series;
  if (options.split_exponent) {
    const double eta = *options.split_exponent;
    if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("split_exponent: must lie in (0, 1)");
    sample = series.prefix(std::pow(series.span(), eta));
  }
  GofResult out = run_gof(sample, u_grid, v_grid, fitted.cdf_evaluator(), options);
  out.fit = fit;
  out.null_description = "composite " + to_string(null_model.family()) + " (fitted " + fitted.describe() + ")";
  return out;
}

GofResult gof_test(const VolPairSeries& series, std::span<const double> u_grid, std::span<const double> v_grid,
                   const CopulaCdf& null_cdf, const std::string& description, const GofOptions& options) {
  if (options.composite || options.split_exponent) {
    throw ConfigError("composite: a fixed null CDF has no family to fit");
  }
  GofResult out = run_gof(series, u_grid, v_grid, null_cdf, options);
  out.null_description = description;
  return out;
}

}  // namespace rcv
