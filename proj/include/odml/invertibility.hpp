#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "odml/model.hpp"

namespace odml {

/// Per-step log Lipschitz coefficients log Lambda_t(theta) for t = 1..n.
/// Shares the filter's time indexing: the garch/location coefficient at t
/// uses y_t, the tv_ar one uses y_{t-1}.
inline std::vector<double> log_lambda_series(std::span<const double> series,
                                             const ModelSpec& spec) {
  SeriesView view(series, spec);
  std::vector<double> out(static_cast<std::size_t>(view.n()));
  for (int t = 1; t <= view.n(); ++t)
    out[static_cast<std::size_t>(t) - 1] = std::log(lipschitz_coeff(view.window(t), spec));
  return out;
}

/// Sample mean of log Lambda_t with a flag for the degenerate Lambda_t = 0
/// case (possible when beta = 0 and the relevant observation is zero).
struct LyapunovResult {
  double value;
  bool has_zero_coefficient;
};

inline LyapunovResult empirical_lyapunov_checked(std::span<const double> series,
                                                 const ModelSpec& spec) {
  auto logs = log_lambda_series(series, spec);
  double sum = 0.0;
  bool zero = false;
  for (double x : logs) {
    if (std::isinf(x) && x < 0.0) zero = true;
    sum += x;
  }
  double value = zero ? -std::numeric_limits<double>::infinity()
                      : sum / static_cast<double>(logs.size());
  return {value, zero};
}

/// Empirical Lyapunov value (1/n) sum_{t=1..n} log Lambda_t(theta).
inline double empirical_lyapunov(std::span<const double> series, const ModelSpec& spec) {
  return empirical_lyapunov_checked(series, spec).value;
}

/// Membership of theta in the estimated region Theta_hat_n, i.e. whether the
/// empirical Lyapunov value clears the margin -delta.
inline bool in_region(std::span<const double> series, const ModelSpec& spec, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("in_region: delta must be positive");
  return empirical_lyapunov(series, spec) <= -delta;
}

/// Data-free sufficient condition for the Beta-t-GARCH filter:
///   (1/2) log|beta + alpha (v+1)| + (1/2) log|beta + (alpha+gamma)(v+1)|.
/// A negative value implies the unfeasible contraction condition under a
/// symmetric return distribution.
inline double feasible_condition_garch(const BetaTGarchParams& p) {
  double a = std::fabs(p.beta + p.alpha * (p.v + 1.0));
  double b = std::fabs(p.beta + (p.alpha + p.gamma) * (p.v + 1.0));
  if (a == 0.0 || b == 0.0) return -std::numeric_limits<double>::infinity();
  return 0.5 * std::log(a) + 0.5 * std::log(b);
}

}  // namespace odml
