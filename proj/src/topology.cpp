#include "manet/topology.hpp"

#include <algorithm>
#include <cmath>

namespace manet::topology {

namespace {

/// pmf(n; lambda) computed as exp(n log lambda - lambda - lgamma(n+1)).
double poisson_pmf(double lambda, int n) {
  if (lambda <= 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(static_cast<double>(n) * std::log(lambda) - lambda -
                  std::lgamma(static_cast<double>(n) + 1.0));
}

/// Sum of pmf over [lo, hi] via one log-space anchor and the multiplicative
/// recurrence pmf(n+1) = pmf(n) * lambda / (n+1).
double poisson_sum(double lambda, int lo, int hi) {
  if (hi < lo) return 0.0;
  lo = std::max(lo, 0);
  double term = poisson_pmf(lambda, lo);
  double sum = term;
  for (int n = lo; n < hi; ++n) {
    term *= lambda / static_cast<double>(n + 1);
    sum += term;
  }
  return sum;
}

}  // namespace

void RegionPolicy::validate() const {
  if (n1 < 0 || n2 <= n1 || network_size < n2)
    throw std::invalid_argument("region policy requires 0 <= n1 < n2 <= N");
}

double ptp(double p_i, int n) {
  if (p_i < 0.0 || p_i > 1.0) throw std::invalid_argument("ptp: probability out of [0,1]");
  if (n < 0) throw std::invalid_argument("ptp: n must be >= 0");
  return 1.0 - std::pow(1.0 - p_i, static_cast<double>(n));
}

int required_rnd(double p_i, double ptp_target) {
  if (!(p_i > 0.0 && p_i < 1.0)) throw std::invalid_argument("required_rnd: p_i must be in (0,1)");
  if (!(ptp_target > 0.0 && ptp_target < 1.0))
    throw std::invalid_argument("required_rnd: target must be in (0,1)");
  int n = static_cast<int>(std::ceil(std::log(1.0 - ptp_target) / std::log(1.0 - p_i)));
  n = std::max(n, 1);
  while (ptp(p_i, n) < ptp_target) ++n;          // guard against rounding at the edge
  while (n > 1 && ptp(p_i, n - 1) >= ptp_target) --n;
  return n;
}

double adjustment_probability(int n_i, const RegionPolicy& policy) {
  policy.validate();
  if (n_i < 0 || n_i > policy.network_size)
    throw std::invalid_argument("adjustment_probability: n_i out of [0, N]");
  double p = 0.0;
  if (n_i < policy.n1) {
    p = static_cast<double>(policy.n1 - n_i) / static_cast<double>(policy.n1);
  } else if (n_i > policy.n2) {
    p = static_cast<double>(n_i - policy.n2) /
        static_cast<double>(policy.network_size - policy.n2);
  }
  return std::clamp(p, 0.0, 1.0);
}

double poisson_region_prob(const PoissonField& field, double area, int n1, int n2) {
  if (field.rho <= 0.0 || area <= 0.0)
    throw std::invalid_argument("poisson_region_prob: rho and area must be > 0");
  if (n1 > n2) return 0.0;
  return poisson_sum(field.rho * area, std::max(n1, 0), n2);
}

double unhealthy_prob(const PoissonField& field, double area, const RegionPolicy& policy) {
  policy.validate();
  if (field.rho <= 0.0 || area <= 0.0)
    throw std::invalid_argument("unhealthy_prob: rho and area must be > 0");
  const double lambda = field.rho * area;
  return poisson_sum(lambda, 0, policy.n1 - 1) +
         poisson_sum(lambda, policy.n2 + 1, policy.network_size);
}

double optimal_area(const PoissonField& field, int n1, int n2) {
  if (field.rho <= 0.0) throw std::invalid_argument("optimal_area: rho must be > 0");
  if (n1 < 1 || n2 < n1) throw std::invalid_argument("optimal_area: need 1 <= n1 <= n2");
  if (n1 == n2) return static_cast<double>(n1) / field.rho;

  // d/d(lambda) P(n1 <= n <= n2) has the sign of sum (n - lambda) pmf(n),
  // positive at lambda = n1 and negative at lambda = n2.
  auto derivative_sign = [&](double lambda) {
    double acc = 0.0;
    for (int n = n1; n <= n2; ++n)
      acc += (static_cast<double>(n) - lambda) * poisson_pmf(lambda, n);
    return acc;
  };
  double lo = static_cast<double>(n1);
  double hi = static_cast<double>(n2);
  double f_lo = derivative_sign(lo);
  if (f_lo < 0.0) throw std::logic_error("optimal_area: no sign change on bracket");
  for (int it = 0; it < 200 && (hi - lo) > 1e-9 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (derivative_sign(mid) >= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi) / field.rho;
}

double optimal_range(double delta_star, double d, const RangeLimits& limits) {
  if (delta_star <= 0.0 || d <= 0.0)
    throw std::invalid_argument("optimal_range: delta and d must be > 0");
  auto area_of = [&](double r) { return r * r * std::acos(std::min(r / (2.0 * d), 1.0)); };

  // The area rises from 0, peaks, then collapses to 0 at r = 2d. Scan for
  // the peak to bound the increasing branch, then bisect on it.
  const double r_hi_domain = 2.0 * d;
  double peak_r = 0.0;
  double peak_area = 0.0;
  constexpr int kScan = 512;
  for (int i = 1; i <= kScan; ++i) {
    const double r = r_hi_domain * static_cast<double>(i) / (kScan + 1);
    const double a = area_of(r);
    if (a > peak_area) {
      peak_area = a;
      peak_r = r;
    }
  }
  if (delta_star >= peak_area)
    return std::clamp(limits.r_max, limits.r_min, limits.r_max);  // unreachable: saturate

  double lo = 0.0;
  double hi = peak_r;
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    if (area_of(mid) < delta_star)
      lo = mid;
    else
      hi = mid;
  }
  return std::clamp(0.5 * (lo + hi), limits.r_min, limits.r_max);
}

double predicted_adjustment_ratio(const PoissonField& field, double area,
                                  const RegionPolicy& policy) {
  policy.validate();
  if (field.rho <= 0.0 || area <= 0.0)
    throw std::invalid_argument("predicted_adjustment_ratio: rho and area must be > 0");
  const double lambda = field.rho * area;
  double acc = 0.0;
  double term = poisson_pmf(lambda, 0);
  for (int n = 0; n <= policy.network_size; ++n) {
    if (n > 0) term *= lambda / static_cast<double>(n);
    if (n < policy.n1 || n > policy.n2) acc += term * adjustment_probability(n, policy);
  }
  return acc;
}

RangeAction k_connection_decision(int n_i, int k) {
  if (n_i < 0 || k < 1) throw std::invalid_argument("k_connection_decision: bad arguments");
  if (n_i < k) return RangeAction::Grow;
  if (n_i > k) return RangeAction::Shrink;
  return RangeAction::Hold;
}

}  // namespace manet::topology
