#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rcv/random.hpp"

namespace rcv {

enum class CopulaFamily { kIndependence, kGumbel, kClayton };

std::string to_string(CopulaFamily family);
CopulaFamily parse_family(const std::string& name);

struct TailParams {
  double lower = 0.0;
  double upper = 0.0;
};

/// Parametric bivariate copula: Gumbel (theta >= 1), Clayton (alpha >= 0)
/// or the independence copula. Immutable once constructed.
class CopulaModel {
public:
  static CopulaModel independence();
  static CopulaModel gumbel(double theta);
  static CopulaModel clayton(double alpha);
  /// Throws DomainError when `param` is outside the family's domain.
  static CopulaModel make(CopulaFamily family, double param);

  CopulaFamily family() const { return family_; }
  /// Gumbel theta or Clayton alpha; 0 for independence.
  double param() const { return param_; }
  std::string describe() const;

  double cdf(double u, double v) const;
  /// Mixed partial of the CDF. Requires u, v in (0, 1).
  double density(double u, double v) const;
  double log_density(double u, double v) const;
  /// First partials of the CDF, u, v in (0, 1).
  double partial_u(double u, double v) const;
  double partial_v(double u, double v) const { return partial_u(v, u); }

  std::pair<double, double> sample(PhiloxStream& rng) const;

  double kendall_tau() const;
  TailParams tail_params() const;
  /// Kendall distribution K(z) = P(C(U,V) <= z), z in (0, 1).
  double kendall_function(double z) const;

  std::function<double(double, double)> cdf_evaluator() const {
    return [model = *this](double u, double v) { return model.cdf(u, v); };
  }

private:
  CopulaModel(CopulaFamily family, double param) : family_(family), param_(param) {}

  CopulaFamily family_;
  double param_;
};

using CopulaCdf = std::function<double(double, double)>;

/// Rank- or distribution-transformed pairs in [0, 1]^2.
struct PseudoObservations {
  std::vector<double> u;
  std::vector<double> v;

  std::size_t size() const { return u.size(); }
  void push_back(double a, double b) {
    u.push_back(a);
    v.push_back(b);
  }
  /// Throws DataError on unequal lengths or coordinates outside [0, 1].
  void validate() const;
};

struct TailConcentration {
  double lower = 0.0;
  double upper = 0.0;
};

/// L(z) = C(z,z)/z and U(z) = (1 - 2z + C(z,z))/(1 - z) for z in (0, 1).
TailConcentration tail_concentration(const CopulaCdf& cdf, double z);

/// Kendall distribution of the empirical copula of a sample: the share of
/// observations whose empirical-copula value is at most z.
class EmpiricalKendall {
public:
  explicit EmpiricalKendall(const PseudoObservations& obs);
  double operator()(double z) const;

private:
  std::vector<double> copula_at_obs_;  // sorted
};

double kendall_function(const CopulaModel& model, double z);
double kendall_function(const PseudoObservations& obs, double z);

struct MleFit {
  CopulaFamily family = CopulaFamily::kIndependence;
  double param = 0.0;
  double log_likelihood = 0.0;
  CopulaModel model() const { return CopulaModel::make(family, param); }
};

inline constexpr double kDensityClip = 1e-10;

/// Maximum likelihood by golden-section search over the family's bounded
/// parameter range (Gumbel [1, 50], Clayton [1e-4, 50]), tolerance 1e-6.
MleFit fit_mle(const PseudoObservations& obs, CopulaFamily family);

/// Kendall's tau (tau-b, equal to tau-a without ties) in O(n log n).
/// With `adjusted`, returns sin(pi/2 * tau).
double kendall_tau_sample(const PseudoObservations& obs, bool adjusted = false);

}  // namespace rcv
