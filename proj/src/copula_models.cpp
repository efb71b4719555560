#include "rcv/copula_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "rcv/errors.hpp"

namespace rcv {

namespace {

constexpr double kGumbelMax = 50.0;
constexpr double kClaytonMin = 1e-4;
constexpr double kClaytonMax = 50.0;
constexpr double kGoldenTolerance = 1e-6;

double clamp_open_unit(double x) {
  constexpr double lo = std::numeric_limits<double>::min();
  const double hi = std::nextafter(1.0, 0.0);
  return std::clamp(x, lo, hi);
}

// (x^theta + y^theta)^(1/theta) without overflow for large theta.
double gumbel_norm(double x, double y, double theta) {
  const double hi = std::max(x, y);
  const double lo = std::min(x, y);
  if (hi == 0.0) {
    return 0.0;
  }
  return hi * std::pow(1.0 + std::pow(lo / hi, theta), 1.0 / theta);
}

// log(x^theta + y^theta)
double gumbel_log_sum(double x, double y, double theta) {
  const double hi = std::max(x, y);
  const double lo = std::min(x, y);
  return theta * std::log(hi) + std::log1p(std::pow(lo / hi, theta));
}

// u^-alpha + v^-alpha - 1 computed stably for small alpha.
double clayton_sum(double u, double v, double alpha) {
  return 1.0 + std::expm1(-alpha * std::log(u)) + std::expm1(-alpha * std::log(v));
}

void require_open_unit(double u, double v, const char* what) {
  if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0)) {
    std::ostringstream msg;
    msg << what << ": arguments must lie in (0,1), got (" << u << ", " << v << ")";
    throw DomainError(msg.str());
  }
}

}  // namespace

std::string to_string(CopulaFamily family) {
  switch (family) {
    case CopulaFamily::kIndependence:
      return "independence";
    case CopulaFamily::kGumbel:
      return "gumbel";
    case CopulaFamily::kClayton:
      return "clayton";
  }
  return "unknown";
}

CopulaFamily parse_family(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "independence" || lower == "indep") return CopulaFamily::kIndependence;
  if (lower == "gumbel") return CopulaFamily::kGumbel;
  if (lower == "clayton") return CopulaFamily::kClayton;
  throw ConfigError("unknown copula family '" + name + "' (expected gumbel, clayton or independence)");
}

CopulaModel CopulaModel::independence() { return CopulaModel(CopulaFamily::kIndependence, 0.0); }

CopulaModel CopulaModel::gumbel(double theta) {
  if (!(theta >= 1.0) || !std::isfinite(theta)) {
    throw DomainError("Gumbel parameter must satisfy theta >= 1");
  }
  return CopulaModel(CopulaFamily::kGumbel, theta);
}

CopulaModel CopulaModel::clayton(double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw DomainError("Clayton parameter must satisfy alpha >= 0");
  }
  return CopulaModel(CopulaFamily::kClayton, alpha);
}

CopulaModel CopulaModel::make(CopulaFamily family, double param) {
  switch (family) {
    case CopulaFamily::kIndependence:
      return independence();
    case CopulaFamily::kGumbel:
      return gumbel(param);
    case CopulaFamily::kClayton:
      return clayton(param);
  }
  throw DomainError("unknown copula family");
}

std::string CopulaModel::describe() const {
  std::ostringstream out;
  out << to_string(family_);
  if (family_ != CopulaFamily::kIndependence) {
    out << "(" << param_ << ")";
  }
  return out.str();
}

double CopulaModel::cdf(double u, double v) const {
  if (u <= 0.0 || v <= 0.0) return 0.0;
  if (u >= 1.0) return std::min(v, 1.0);
  if (v >= 1.0) return u;
  switch (family_) {
    case CopulaFamily::kIndependence:
      return u * v;
    case CopulaFamily::kGumbel:
      return std::exp(-gumbel_norm(-std::log(u), -std::log(v), param_));
    case CopulaFamily::kClayton: {
      if (param_ == 0.0) return u * v;
      const double s = clayton_sum(u, v, param_);
      return std::exp(-std::log(s) / param_);
    }
  }
  return 0.0;
}

double CopulaModel::log_density(double u, double v) const {
  require_open_unit(u, v, "copula density");
  switch (family_) {
    case CopulaFamily::kIndependence:
      return 0.0;
    case CopulaFamily::kGumbel: {
      const double theta = param_;
      const double x = -std::log(u);
      const double y = -std::log(v);
      const double norm = gumbel_norm(x, y, theta);
      const double log_sum = gumbel_log_sum(x, y, theta);
      return -norm + x + y + (theta - 1.0) * (std::log(x) + std::log(y)) +
             (2.0 / theta - 2.0) * log_sum + std::log(norm + theta - 1.0) - std::log(norm);
    }
    case CopulaFamily::kClayton: {
      const double alpha = param_;
      if (alpha == 0.0) return 0.0;
      const double s = clayton_sum(u, v, alpha);
      return std::log1p(alpha) - (alpha + 1.0) * (std::log(u) + std::log(v)) -
             (1.0 / alpha + 2.0) * std::log(s);
    }
  }
  return 0.0;
}

double CopulaModel::density(double u, double v) const { return std::exp(log_density(u, v)); }

double CopulaModel::partial_u(double u, double v) const {
  require_open_unit(u, v, "copula partial derivative");
  switch (family_) {
    case CopulaFamily::kIndependence:
      return v;
    case CopulaFamily::kGumbel: {
      const double theta = param_;
      const double x = -std::log(u);
      const double y = -std::log(v);
      const double norm = gumbel_norm(x, y, theta);
      // C * norm^(1-theta) * x^(theta-1) / u
      return std::exp(-norm + (1.0 - theta) * std::log(norm) + (theta - 1.0) * std::log(x) + x);
    }
    case CopulaFamily::kClayton: {
      const double alpha = param_;
      if (alpha == 0.0) return v;
      const double s = clayton_sum(u, v, alpha);
      return std::exp(-(alpha + 1.0) * std::log(u) - (1.0 / alpha + 1.0) * std::log(s));
    }
  }
  return 0.0;
}

std::pair<double, double> CopulaModel::sample(PhiloxStream& rng) const {
  switch (family_) {
    case CopulaFamily::kIndependence:
      return {rng.uniform(), rng.uniform()};
    case CopulaFamily::kGumbel: {
      if (param_ == 1.0) return {rng.uniform(), rng.uniform()};
      // Marshall-Olkin with a positive stable frailty of index 1/theta
      // (Kanter / Chambers-Mallows-Stuck representation).
      const double a = 1.0 / param_;
      const double angle = std::numbers::pi * rng.uniform();
      const double w = rng.exponential();
      const double stable = std::sin(a * angle) / std::pow(std::sin(angle), 1.0 / a) *
                            std::pow(std::sin((1.0 - a) * angle) / w, (1.0 - a) / a);
      const double e1 = rng.exponential();
      const double e2 = rng.exponential();
      return {clamp_open_unit(std::exp(-std::pow(e1 / stable, a))),
              clamp_open_unit(std::exp(-std::pow(e2 / stable, a)))};
    }
    case CopulaFamily::kClayton: {
      if (param_ == 0.0) return {rng.uniform(), rng.uniform()};
      const double frailty = rng.gamma(1.0 / param_);
      const double e1 = rng.exponential();
      const double e2 = rng.exponential();
      return {clamp_open_unit(std::exp(-std::log1p(e1 / frailty) / param_)),
              clamp_open_unit(std::exp(-std::log1p(e2 / frailty) / param_))};
    }
  }
  return {0.5, 0.5};
}

double CopulaModel::kendall_tau() const {
  switch (family_) {
    case CopulaFamily::kIndependence:
      return 0.0;
    case CopulaFamily::kGumbel:
      return 1.0 - 1.0 / param_;
    case CopulaFamily::kClayton:
      return param_ / (param_ + 2.0);
  }
  return 0.0;
}

TailParams CopulaModel::tail_params() const {
  switch (family_) {
    case CopulaFamily::kIndependence:
      return {0.0, 0.0};
    case CopulaFamily::kGumbel:
      return {0.0, 2.0 - std::pow(2.0, 1.0 / param_)};
    case CopulaFamily::kClayton:
      return {param_ > 0.0 ? std::pow(2.0, -1.0 / param_) : 0.0, 0.0};
  }
  return {};
}

double CopulaModel::kendall_function(double z) const {
  if (!(z > 0.0 && z < 1.0)) {
    throw DomainError("Kendall function requires z in (0,1)");
  }
  switch (family_) {
    case CopulaFamily::kIndependence:
      return z * (1.0 - std::log(z));
    case CopulaFamily::kGumbel:
      return z * (1.0 - std::log(z) / param_);
    case CopulaFamily::kClayton:
      if (param_ == 0.0) return z * (1.0 - std::log(z));
      return z * (1.0 - std::expm1(param_ * std::log(z)) / param_);
  }
  return z;
}

void PseudoObservations::validate() const {
  if (u.size() != v.size()) {
    throw DataError("pseudo-observations: coordinate vectors differ in length");
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i] >= 0.0 && u[i] <= 1.0 && v[i] >= 0.0 && v[i] <= 1.0)) {
      throw DataError("pseudo-observations: pair " + std::to_string(i) + " outside [0,1]^2");
    }
  }
}

TailConcentration tail_concentration(const CopulaCdf& cdf, double z) {
  if (!(z > 0.0 && z < 1.0)) {
    throw DomainError("tail concentration requires z in (0,1)");
  }
  const double diag = cdf(z, z);
  TailConcentration out;
  out.lower = std::clamp(diag / z, 0.0, 1.0);
  out.upper = std::clamp((1.0 - 2.0 * z + diag) / (1.0 - z), 0.0, 1.0);
  return out;
}

namespace {

// Fenwick tree over ranks for dominance counting.
class Fenwick {
public:
  explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}
  void add(std::size_t i) {
    for (++i; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
  }
  // number of inserted ranks <= i
  std::size_t prefix(std::size_t i) const {
    std::size_t s = 0;
    for (++i; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

private:
  std::vector<std::size_t> tree_;
};

}  // namespace

EmpiricalKendall::EmpiricalKendall(const PseudoObservations& obs) {
  obs.validate();
  const std::size_t n = obs.size();
  if (n == 0) {
    throw DataError("Kendall function: empty sample");
  }
  // Dense ranks of v (ties share a rank).
  std::vector<double> vs(obs.v);
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
  std::vector<std::size_t> vrank(n);
  for (std::size_t i = 0; i < n; ++i) {
    vrank[i] = static_cast<std::size_t>(std::lower_bound(vs.begin(), vs.end(), obs.v[i]) - vs.begin());
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return obs.u[a] < obs.u[b]; });

  // Insert all points sharing a u value before querying any of them, so the
  // count includes every j with u_j <= u_i and v_j <= v_i.
  Fenwick tree(vs.size());
  copula_at_obs_.resize(n);
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start;
    while (end < n && obs.u[order[end]] == obs.u[order[start]]) ++end;
    for (std::size_t k = start; k < end; ++k) tree.add(vrank[order[k]]);
    for (std::size_t k = start; k < end; ++k) {
      const std::size_t i = order[k];
      copula_at_obs_[i] = static_cast<double>(tree.prefix(vrank[i])) / static_cast<double>(n);
    }
    start = end;
  }
  std::sort(copula_at_obs_.begin(), copula_at_obs_.end());
}

double EmpiricalKendall::operator()(double z) const {
  if (!(z > 0.0 && z < 1.0)) {
    throw DomainError("Kendall function requires z in (0,1)");
  }
  const auto count = std::upper_bound(copula_at_obs_.begin(), copula_at_obs_.end(), z) - copula_at_obs_.begin();
  return static_cast<double>(count) / static_cast<double>(copula_at_obs_.size());
}

double kendall_function(const CopulaModel& model, double z) { return model.kendall_function(z); }

double kendall_function(const PseudoObservations& obs, double z) { return EmpiricalKendall(obs)(z); }

namespace {

double log_likelihood(const PseudoObservations& obs, const CopulaModel& model) {
  double total = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double u = std::clamp(obs.u[i], kDensityClip, 1.0 - kDensityClip);
    const double v = std::clamp(obs.v[i], kDensityClip, 1.0 - kDensityClip);
    total += model.log_density(u, v);
  }
  return total;
}

}  // namespace

MleFit fit_mle(const PseudoObservations& obs, CopulaFamily family) {
  obs.validate();
  if (obs.size() < 2) {
    throw DataError("fit_mle: at least two pseudo-observations are required");
  }
  MleFit fit;
  fit.family = family;
  if (family == CopulaFamily::kIndependence) {
    fit.param = 0.0;
    fit.log_likelihood = 0.0;
    return fit;
  }
  double lo = family == CopulaFamily::kGumbel ? 1.0 : kClaytonMin;
  double hi = family == CopulaFamily::kGumbel ? kGumbelMax : kClaytonMax;

  // Non-finite values are treated as -inf so the search steers away from them.
  auto objective = [&](double param) {
    const double ll = log_likelihood(obs, CopulaModel::make(family, param));
    return std::isfinite(ll) ? ll : -std::numeric_limits<double>::infinity();
  };

  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - ratio * (hi - lo);
  double b = lo + ratio * (hi - lo);
  double fa = objective(a);
  double fb = objective(b);
  while (hi - lo > kGoldenTolerance) {
    if (fa >= fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - ratio * (hi - lo);
      fa = objective(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + ratio * (hi - lo);
      fb = objective(b);
    }
  }
  // Compare the interior optimum with the interval end points; the
  // likelihood often peaks on the boundary at independence.
  double best = 0.5 * (lo + hi);
  double best_ll = objective(best);
  const double lower_bound = family == CopulaFamily::kGumbel ? 1.0 : kClaytonMin;
  const double lower_ll = objective(lower_bound);
  if (lower_ll > best_ll) {
    best = lower_bound;
    best_ll = lower_ll;
  }
  if (!std::isfinite(best_ll)) {
    throw NumericalError("fit_mle: log-likelihood is not finite over the search domain");
  }
  fit.param = best;
  fit.log_likelihood = best_ll;
  return fit;
}

namespace {

// Merge sort counting inversions (strict: equal keys are not inversions).
std::uint64_t count_inversions(std::vector<double>& values, std::vector<double>& scratch, std::size_t lo,
                               std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t swaps = count_inversions(values, scratch, lo, mid) + count_inversions(values, scratch, mid, hi);
  std::size_t i = lo;
  std::size_t j = mid;
  std::size_t k = lo;
  while (i < mid && j < hi) {
    if (values[j] < values[i]) {
      swaps += mid - i;
      scratch[k++] = values[j++];
    } else {
      scratch[k++] = values[i++];
    }
  }
  while (i < mid) scratch[k++] = values[i++];
  while (j < hi) scratch[k++] = values[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo), scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            values.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

// Sum over runs of equal values of len*(len-1)/2, on a sorted range.
template <typename Equal>
std::uint64_t tied_pairs(std::size_t n, Equal equal) {
  std::uint64_t pairs = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i < n; ++i) {
    if (equal(i - 1, i)) {
      ++run;
    } else {
      pairs += run * (run - 1) / 2;
      run = 1;
    }
  }
  pairs += run * (run - 1) / 2;
  return pairs;
}

}  // namespace

double kendall_tau_sample(const PseudoObservations& obs, bool adjusted) {
  if (obs.u.size() != obs.v.size()) {
    throw DataError("kendall_tau_sample: coordinate vectors differ in length");
  }
  const std::size_t n = obs.size();
  if (n < 2) {
    throw DataError("kendall_tau_sample: at least two pairs are required");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return obs.u[a] < obs.u[b] || (obs.u[a] == obs.u[b] && obs.v[a] < obs.v[b]);
  });
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = obs.u[order[i]];
    ys[i] = obs.v[order[i]];
  }
  const std::uint64_t x_ties = tied_pairs(n, [&](std::size_t a, std::size_t b) { return xs[a] == xs[b]; });
  const std::uint64_t joint_ties =
      tied_pairs(n, [&](std::size_t a, std::size_t b) { return xs[a] == xs[b] && ys[a] == ys[b]; });
  std::vector<double> scratch(n);
  const std::uint64_t discordant = count_inversions(ys, scratch, 0, n);
  const std::uint64_t y_ties = tied_pairs(n, [&](std::size_t a, std::size_t b) { return ys[a] == ys[b]; });

  const double total = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  const double denom = std::sqrt((total - static_cast<double>(x_ties)) * (total - static_cast<double>(y_ties)));
  if (denom == 0.0) {
    return 0.0;
  }
  const double numer = total - static_cast<double>(x_ties) - static_cast<double>(y_ties) +
                       static_cast<double>(joint_ties) - 2.0 * static_cast<double>(discordant);
  const double tau = numer / denom;
  return adjusted ? std::sin(std::numbers::pi / 2.0 * tau) : tau;
}

}  // namespace rcv
