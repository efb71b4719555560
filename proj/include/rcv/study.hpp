#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rcv/inference.hpp"
#include "rcv/occupation.hpp"
#include "rcv/spot_vol.hpp"
#include "rcv/sv_simulator.hpp"

namespace rcv {

/// Replication m of a study simulates `base` with replication index m, so
/// results do not depend on thread count or scheduling.
struct StudyDesign {
  SimConfig base;
  int replications = 200;
};

/// Spot-variance series of a simulated path observed n times a day, with the
/// default block size for n.
VolPairSeries realized_series(const SimPath& path, int obs_per_day);

/// Independent 64-bit seed for replication m of a Monte Carlo layer.
std::uint64_t replication_seed(std::uint64_t seed, std::uint32_t replication);

struct RmseRow {
  std::string estimator;  // "empirical" or "realized"
  int obs_per_day = 0;    // 0 for the empirical copula
  int days = 0;
  double rmse = 0.0;      // average over replications of the per-path RMSE
  double sd = 0.0;
  int replications = 0;
};

struct RmseStudy {
  std::vector<RmseRow> rows;
  const RmseRow& find(const std::string& estimator, int obs_per_day, int days) const;
};

/// Each replication simulates the longest span once; shorter spans use its
/// leading days.
RmseStudy rmse_study(const StudyDesign& design, std::span<const int> obs_per_day, std::span<const int> spans,
                     double grid_step = 0.01);

struct PivotPoint {
  double u = 0.0;
  double v = 0.0;
  std::vector<double> z;  // one studentized value per usable replication
  double mean = 0.0;
  double sd = 0.0;
};

struct PivotStudy {
  std::vector<PivotPoint> points;
  int replications = 0;
  int skipped = 0;  // replications with a nonpositive variance estimate
  int obs_per_day = 0;
  int days = 0;
};

/// sqrt(T) (C_hat - C) / sqrt(avar_C) at each (u, u).
PivotStudy pivot_study(const StudyDesign& design, int obs_per_day, int days, std::span<const double> levels,
                       const AvarCOptions& options = {});

struct GofScenario {
  std::string label;
  CopulaModel truth = CopulaModel::gumbel(2.0);
  CopulaModel null_model = CopulaModel::gumbel(2.0);
  int days = 500;
  int obs_per_day = 78;
};

struct RejectionRow {
  std::string label;
  int days = 0;
  int obs_per_day = 0;
  int replications = 0;
  int failed = 0;
  std::vector<double> p_values;
  double rate(double level) const;
};

RejectionRow rejection_study(const StudyDesign& design, const GofScenario& scenario, std::span<const double> u_grid,
                             std::span<const double> v_grid, const GofOptions& options);

struct CoverageStudy {
  int replications = 0;
  int covered = 0;
  int failed = 0;
  double level = 0.95;
  std::vector<double> half_widths;
  double coverage() const;
};

CoverageStudy band_coverage_study(const StudyDesign& design, int obs_per_day, int days, std::span<const double> u_grid,
                                  std::span<const double> v_grid, double level, int draws, std::uint64_t seed,
                                  const AvarCOptions& options = {});

struct DensityRow {
  double x = 0.0;
  double density = 0.0;
  double normal = 0.0;
};
/// Gaussian-kernel density of the sample on [lo, hi] with Silverman's
/// bandwidth, next to the standard normal density.
std::vector<DensityRow> density_table(std::span<const double> sample, double lo = -4.0, double hi = 4.0,
                                      int points = 81);

struct QuantileRow {
  double probability = 0.0;
  double normal = 0.0;
  double sample = 0.0;
};
/// Normal Q-Q pairs at the plotting positions (i - 0.5) / n.
std::vector<QuantileRow> qq_table(std::span<const double> sample);

}  // namespace rcv
