#pragma once

#include <stdexcept>

namespace manet::topology {

/// Healthy/unhealthy relay-node-degree bands. A node with RND inside
/// [n1, n2] (inclusive) never adjusts its range; outside, the adjustment
/// probability grows with the deviation. p1/p2 record the delivery-ratio
/// bounds the band was derived from when configured that way.
struct RegionPolicy {
  int n1 = 7;
  int n2 = 9;
  int network_size = 100;  // N
  double p1 = 0.9;
  double p2 = 0.99;

  void validate() const;
};

/// Spatial Poisson node field (nodes per square meter).
struct PoissonField {
  double rho = 1e-4;
};

struct RangeLimits {
  double r_min = 10.0;
  double r_max = 1000.0;
};

enum class RangeAction { Grow, Shrink, Hold };

/// Delivery probability sender -> candidate set: 1 - (1 - p)^n.
double ptp(double p_i, int n);

/// Smallest n with ptp(p_i, n) >= target.
int required_rnd(double p_i, double ptp_target);

/// Range-adjustment probability for a node with RND = n_i: 0 inside the
/// healthy band, (n1 - n_i)/n1 below it, (n_i - n2)/(N - n2) above it,
/// clamped to [0, 1].
double adjustment_probability(int n_i, const RegionPolicy& policy);

/// P(n1 <= n <= n2) for n ~ Poisson(rho * area). Stable multiplicative
/// recurrence in log space; safe up to n ~ 1e4.
double poisson_region_prob(const PoissonField& field, double area, int n1, int n2);

/// P(n < n1) + P(n2 < n <= N), truncated exactly at N.
double unhealthy_prob(const PoissonField& field, double area, const RegionPolicy& policy);

/// The survival area that maximizes the probability of the RND landing in
/// [n1, n2]: root of sum_{n1..n2} (n - rho*area) * pmf(n) in rho*area,
/// bracketed on [n1, n2] and bisected to 1e-9 relative tolerance.
double optimal_area(const PoissonField& field, int n1, int n2);

/// Invert delta = r^2 * arccos(r / (2 d)) for r on the increasing branch,
/// to 1e-6 m. When delta exceeds the largest area achievable for this d the
/// result saturates at limits.r_max (a warning is the caller's business);
/// the result is always clamped into [limits.r_min, limits.r_max].
double optimal_range(double delta_star, double d, const RangeLimits& limits = {});

/// Expected per-node adjustment probability under the Poisson field:
/// sum over unhealthy n <= N of pmf(n) * adjustment_probability(n).
double predicted_adjustment_ratio(const PoissonField& field, double area,
                                  const RegionPolicy& policy);

/// Fixed-degree baseline controller decision.
RangeAction k_connection_decision(int n_i, int k);

}  // namespace manet::topology
