#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "odml/model.hpp"

namespace odml {

/// Filtered path f_hat_t(theta) for t = 0..n; values[0] is the initialization.
struct FilterPath {
  std::vector<double> values;
  double init;
  ModelSpec spec;
};

namespace detail {

inline double sample_variance(std::span<const double> x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(x.size());
}

inline double sample_median(std::span<const double> x) {
  std::vector<double> tmp(x.begin(), x.end());
  std::sort(tmp.begin(), tmp.end());
  std::size_t n = tmp.size();
  return n % 2 == 1 ? tmp[n / 2] : 0.5 * (tmp[n / 2 - 1] + tmp[n / 2]);
}

}  // namespace detail

/// Default filter initialization: sample variance for the variance filter,
/// sample median for the location filter (both clamped into F_theta), zero
/// for the time-varying AR coefficient.
inline double default_init(std::span<const double> series, const ModelSpec& spec) {
  switch (spec.kind()) {
    case ModelKind::beta_t_garch:
      return std::max(detail::sample_variance(series), spec.garch().omega_bar());
    case ModelKind::tv_ar:
      return 0.0;
    case ModelKind::t_location:
      return filter_domain(spec).clamp(detail::sample_median(series));
  }
  return 0.0;
}

/// Run the stochastic recurrence f_{t+1} = phi(f_t, Y_t^k, theta) over the
/// sample, starting from f0 in F_theta. Output has n+1 values (t = 0..n).
inline FilterPath run_filter(std::span<const double> series, const ModelSpec& spec, double f0) {
  SeriesView view(series, spec);
  FilterDomain dom = filter_domain(spec);
  if (!std::isfinite(f0) || !dom.contains(f0))
    throw std::domain_error("filter initialization outside F_theta");

  FilterPath path{std::vector<double>(static_cast<std::size_t>(view.n()) + 1), f0, spec};
  path.values[0] = f0;
  double f = f0;
  for (int t = 0; t < view.n(); ++t) {
    try {
      f = filter_step(f, view.window(t), spec);
    } catch (const std::domain_error& e) {
      throw std::domain_error(std::string(e.what()) + " at step t = " + std::to_string(t));
    }
    path.values[static_cast<std::size_t>(t) + 1] = f;
  }
  return path;
}

/// Averaged log-likelihood (1/n) sum_{t=1..n} log p(y_t | f_hat_t, theta).
/// Returns -inf when some density underflows to zero; never throws for that.
inline double log_likelihood(std::span<const double> series, const ModelSpec& spec, double f0) {
  SeriesView view(series, spec);
  FilterDomain dom = filter_domain(spec);
  if (!std::isfinite(f0) || !dom.contains(f0))
    throw std::domain_error("filter initialization outside F_theta");

  const int n = view.n();
  double total = 0.0;
  double f = f0;

  if (spec.kind() == ModelKind::beta_t_garch) {
    // Hot path: hoist the density constant out of the loop.
    const auto& p = spec.garch();
    const double log_const = detail::garch_logdensity_const(p.v);
    for (int t = 0; t < n; ++t) {
      f = filter_step(f, view.window(t), spec);
      total += detail::garch_logdensity(view.y(t + 1), f, p.v, log_const);
    }
  } else {
    for (int t = 0; t < n; ++t) {
      f = filter_step(f, view.window(t), spec);
      total += log_density(view.window(t + 1), f, spec);
    }
  }
  if (std::isnan(total)) throw std::domain_error("log-likelihood evaluated to NaN");
  return total / static_cast<double>(n);
}

/// Gap between two filter runs started from different initializations, the
/// fitted exponential decay rate of that gap, and whether it has vanished.
struct DivergenceDiagnostic {
  std::vector<double> abs_diff;  // |f_t^(a) - f_t^(b)| for t = 0..n
  double log_slope;              // least-squares slope of log gap on t
  bool slope_valid;              // false when fewer than 2 usable points
  bool vanished;                 // gap below 1e-10 at t = n
};

inline DivergenceDiagnostic divergence_diagnostic(std::span<const double> series,
                                                  const ModelSpec& spec, double f0_a,
                                                  double f0_b) {
  if (f0_a == f0_b) throw std::invalid_argument("divergence_diagnostic: f0_a == f0_b");
  FilterPath a = run_filter(series, spec, f0_a);
  FilterPath b = run_filter(series, spec, f0_b);

  DivergenceDiagnostic diag;
  diag.abs_diff.resize(a.values.size());
  for (std::size_t t = 0; t < a.values.size(); ++t)
    diag.abs_diff[t] = std::fabs(a.values[t] - b.values[t]);

  // Least-squares slope of log gap over the steps where the gap is resolvable.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long m = 0;
  for (std::size_t t = 0; t < diag.abs_diff.size(); ++t) {
    if (diag.abs_diff[t] > 1e-300) {
      double x = static_cast<double>(t);
      double y = std::log(diag.abs_diff[t]);
      sx += x; sy += y; sxx += x * x; sxy += x * y;
      ++m;
    }
  }
  double denom = static_cast<double>(m) * sxx - sx * sx;
  diag.slope_valid = m >= 2 && denom > 0.0;
  diag.log_slope = diag.slope_valid
                       ? (static_cast<double>(m) * sxy - sx * sy) / denom
                       : std::numeric_limits<double>::quiet_NaN();
  diag.vanished = diag.abs_diff.back() < 1e-10;
  return diag;
}

}  // namespace odml
