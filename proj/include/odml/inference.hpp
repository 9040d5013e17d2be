#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "odml/invertibility.hpp"
#include "odml/math/special.hpp"

namespace odml {

/// Newey-West (Bartlett-kernel) long-run variance estimator with lag
/// truncation m:
///   gamma_0 + 2 sum_{j=1..m} (1 - j/(m+1)) gamma_j,
/// with gamma_j = (1/n) sum_{t=j+1..n} (x_t - xbar)(x_{t-j} - xbar).
/// The Bartlett weights keep the estimate nonnegative.
inline double newey_west_variance(std::span<const double> x, int bandwidth) {
  const int n = static_cast<int>(x.size());
  if (n < 2) throw std::invalid_argument("newey_west_variance: need n >= 2");
  if (bandwidth < 0 || bandwidth >= n)
    throw std::invalid_argument("newey_west_variance: need 0 <= m < n");

  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);

  double out = 0.0;
  for (int j = 0; j <= bandwidth; ++j) {
    double acov = 0.0;
    for (int t = j; t < n; ++t)
      acov += (x[static_cast<std::size_t>(t)] - mean) *
              (x[static_cast<std::size_t>(t - j)] - mean);
    acov /= static_cast<double>(n);
    double weight = 1.0 - static_cast<double>(j) / (static_cast<double>(bandwidth) + 1.0);
    out += (j == 0 ? 1.0 : 2.0 * weight) * acov;
  }
  return std::max(out, 0.0);
}

/// Standard bandwidth rule floor(4 (n/100)^{2/9}).
inline int default_bandwidth(int n) {
  return static_cast<int>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 2.0 / 9.0)));
}

/// Boundary test of H0: E log Lambda_0(theta) = 0.
struct TestResult {
  double t_stat = 0.0;      // T_n
  double sigma2_hat = 0.0;  // HAC variance of n^{-1/2} sum log Lambda_t
  int bandwidth = 0;
  double p_two_sided = 1.0;
  double p_left = 0.5;   // Phi(T_n); small = evidence of contraction
  double p_right = 0.5;
  int n = 0;
};

constexpr double kDegenerateVarianceThreshold = 1e-14;

/// Test statistic from a raw sequence of log Lambda_t values.
inline TestResult invertibility_test_from_logs(std::span<const double> logs,
                                               std::optional<int> bandwidth = {}) {
  const int n = static_cast<int>(logs.size());
  if (n < 2) throw std::invalid_argument("invertibility test: need n >= 2");
  for (double x : logs)
    if (!std::isfinite(x))
      throw NumericalError("invertibility test: non-finite log Lambda_t in sample");

  TestResult res;
  res.n = n;
  res.bandwidth = bandwidth.value_or(default_bandwidth(n));
  res.sigma2_hat = newey_west_variance(logs, res.bandwidth);
  if (res.sigma2_hat < kDegenerateVarianceThreshold)
    throw DegenerateVarianceError(
        "invertibility test: HAC variance is zero; log Lambda_t is constant "
        "(e.g. alpha = gamma = 0), so the boundary statistic is undefined");

  double mean = 0.0;
  for (double x : logs) mean += x;
  mean /= static_cast<double>(n);

  res.t_stat = std::sqrt(static_cast<double>(n)) * mean / std::sqrt(res.sigma2_hat);
  res.p_left = normal_cdf(res.t_stat);
  res.p_right = 1.0 - res.p_left;
  res.p_two_sided = 2.0 * normal_cdf(-std::fabs(res.t_stat));
  return res;
}

/// Boundary test evaluated at theta on the observed sample (n >= 30).
/// Caveat: the asymptotic normality of T_n presumes a stationary, weakly
/// dependent (geometrically mixing) sample; that property cannot be checked
/// from the data and is not verified at runtime.
inline TestResult invertibility_test(std::span<const double> series, const ModelSpec& spec,
                                     std::optional<int> bandwidth = {}) {
  auto violations = param_validate(spec);
  if (!violations.empty())
    throw std::invalid_argument("invertibility_test: inadmissible theta: " + violations[0]);
  auto logs = log_lambda_series(series, spec);
  if (static_cast<int>(logs.size()) < 30)
    throw std::invalid_argument("invertibility_test: need n >= 30");
  return invertibility_test_from_logs(logs, bandwidth);
}

/// Membership of theta in the level-alpha confidence sets for the true
/// invertibility region: in_up means T_n < z_{1-alpha}, in_lo means
/// T_n < z_alpha.
struct ConfidenceMembership {
  bool in_up = false;
  bool in_lo = false;
  TestResult test;
};

inline ConfidenceMembership confidence_membership(std::span<const double> series,
                                                  const ModelSpec& spec, double alpha,
                                                  std::optional<int> bandwidth = {}) {
  if (!(alpha > 0.0 && alpha <= 0.5))
    throw std::invalid_argument("confidence_membership: alpha must lie in (0, 0.5]");
  ConfidenceMembership out;
  out.test = invertibility_test(series, spec, bandwidth);
  out.in_up = out.test.t_stat < normal_quantile(1.0 - alpha);
  out.in_lo = out.test.t_stat < normal_quantile(alpha);
  return out;
}

}  // namespace odml
