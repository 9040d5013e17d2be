#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "odml/errors.hpp"
#include "odml/math/special.hpp"

namespace odml {

enum class ModelKind { beta_t_garch, tv_ar, t_location };

inline std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::beta_t_garch: return "beta_t_garch";
    case ModelKind::tv_ar: return "tv_ar";
    case ModelKind::t_location: return "t_location";
  }
  return "?";
}

inline ModelKind model_kind_from_string(const std::string& s) {
  if (s == "beta_t_garch") return ModelKind::beta_t_garch;
  if (s == "tv_ar") return ModelKind::tv_ar;
  if (s == "t_location") return ModelKind::t_location;
  throw ConfigError("unknown model kind: '" + s + "'");
}

/// Beta-t-GARCH(1,1) statics. y_t = sqrt(f_t) * eps_t with variance-one
/// Student-t innovations, so f_t is the conditional variance; the update is
///   f_{t+1} = omega + beta f_t + (alpha + gamma d_t) (v+1) y_t^2
///             / ((v-2) + y_t^2 / f_t),
/// with the leverage dummy d_t = 1 when y_t <= 0.
struct BetaTGarchParams {
  double omega;  // level (return^2 units), > 0
  double beta;   // persistence, in [0, 1)
  double alpha;  // news impact, >= 0
  double gamma;  // leverage, >= -alpha
  double v;      // degrees of freedom, > 2

  /// Lower edge of the filter range, omega / (1 - beta).
  double omega_bar() const { return omega / (1.0 - beta); }
};

/// First-order autoregression with a time-varying coefficient:
///   y_t = f_t y_{t-1} + sigma eps_t, eps_t ~ t_v,
///   f_{t+1} = omega + beta f_t
///             + alpha (y_t - f_t y_{t-1}) y_{t-1} / (1 + (y_t - f_t y_{t-1})^2 / (v sigma^2)).
struct TvArParams {
  double omega;
  double beta;
  double alpha;  // score gain
  double sigma;  // scale, > 0
  double v;      // degrees of freedom, > 0
};

/// Student-t location model:
///   y_t = f_t + sigma eps_t, eps_t ~ t_v,
///   f_{t+1} = omega + beta f_t + alpha (y_t - f_t) / (1 + (y_t - f_t)^2 / (v sigma^2)).
struct TLocationParams {
  double omega;
  double beta;   // persistence, |beta| < 1
  double alpha;  // score gain
  double sigma;  // scale, > 0
  double v;      // degrees of freedom, > 0
};

/// Which bound to use for the location model's bounded correction term.
/// `analytic` is the exact supremum |alpha| sqrt(v sigma^2) / 2 and keeps the
/// filter range literally invariant; `legacy` is the smaller constant
/// |alpha| sqrt(3 v sigma^2) / 4, kept as a compatibility option for
/// reproducing older region calculations.
enum class LocationBoundKind { analytic, legacy };

inline double location_correction_bound(
    const TLocationParams& p, LocationBoundKind kind = LocationBoundKind::analytic) {
  double root = std::sqrt(p.v * p.sigma * p.sigma);
  if (kind == LocationBoundKind::legacy)
    return std::fabs(p.alpha) * std::sqrt(3.0) * root / 4.0;
  return std::fabs(p.alpha) * root / 2.0;
}

/// A model choice together with its parameter vector.
struct ModelSpec {
  std::variant<BetaTGarchParams, TvArParams, TLocationParams> params;

  ModelKind kind() const {
    if (std::holds_alternative<BetaTGarchParams>(params)) return ModelKind::beta_t_garch;
    if (std::holds_alternative<TvArParams>(params)) return ModelKind::tv_ar;
    return ModelKind::t_location;
  }

  /// Number of observation lags entering the update map (1 for tv_ar).
  int lag_order() const { return kind() == ModelKind::tv_ar ? 1 : 0; }

  const BetaTGarchParams& garch() const { return std::get<BetaTGarchParams>(params); }
  const TvArParams& tv_ar() const { return std::get<TvArParams>(params); }
  const TLocationParams& location() const { return std::get<TLocationParams>(params); }
};

inline ModelSpec garch_spec(double omega, double beta, double alpha, double gamma, double v) {
  return ModelSpec{BetaTGarchParams{omega, beta, alpha, gamma, v}};
}
inline ModelSpec tv_ar_spec(double omega, double beta, double alpha, double sigma, double v) {
  return ModelSpec{TvArParams{omega, beta, alpha, sigma, v}};
}
inline ModelSpec location_spec(double omega, double beta, double alpha, double sigma, double v) {
  return ModelSpec{TLocationParams{omega, beta, alpha, sigma, v}};
}

/// Interval (possibly unbounded) where the filtered parameter lives.
struct FilterDomain {
  double lower;
  double upper;

  bool contains(double f) const { return f >= lower && f <= upper; }
  double clamp(double f) const { return std::min(std::max(f, lower), upper); }
};

/// The set F_theta of admissible filter values for a given model.
/// For the location model with beta < 0 the textbook interval
/// [(omega-c)/(1-beta), (omega+c)/(1-beta)] is not invariant under the update
/// map, so the denominator uses 1 - |beta|; both agree for beta >= 0.
inline FilterDomain filter_domain(const ModelSpec& spec,
                                  LocationBoundKind bound = LocationBoundKind::analytic) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (spec.kind()) {
    case ModelKind::beta_t_garch:
      return {spec.garch().omega_bar(), inf};
    case ModelKind::tv_ar:
      return {-inf, inf};
    case ModelKind::t_location: {
      const auto& p = spec.location();
      double c = location_correction_bound(p, bound);
      double mid = p.omega / (1.0 - p.beta);
      double half = c / (1.0 - std::fabs(p.beta));
      return {mid - half, mid + half};
    }
  }
  return {-inf, inf};
}

/// Names of the five parameters, in estimation order.
inline const std::vector<std::string>& param_names(ModelKind kind) {
  static const std::vector<std::string> garch_names = {"omega", "beta", "alpha", "gamma", "v"};
  static const std::vector<std::string> scale_names = {"omega", "beta", "alpha", "sigma", "v"};
  return kind == ModelKind::beta_t_garch ? garch_names : scale_names;
}

inline std::vector<double> param_values(const ModelSpec& spec) {
  switch (spec.kind()) {
    case ModelKind::beta_t_garch: {
      const auto& p = spec.garch();
      return {p.omega, p.beta, p.alpha, p.gamma, p.v};
    }
    case ModelKind::tv_ar: {
      const auto& p = spec.tv_ar();
      return {p.omega, p.beta, p.alpha, p.sigma, p.v};
    }
    case ModelKind::t_location: {
      const auto& p = spec.location();
      return {p.omega, p.beta, p.alpha, p.sigma, p.v};
    }
  }
  return {};
}

inline ModelSpec make_spec(ModelKind kind, std::span<const double> x) {
  if (x.size() != 5) throw std::invalid_argument("make_spec: expected 5 parameters");
  switch (kind) {
    case ModelKind::beta_t_garch: return garch_spec(x[0], x[1], x[2], x[3], x[4]);
    case ModelKind::tv_ar: return tv_ar_spec(x[0], x[1], x[2], x[3], x[4]);
    case ModelKind::t_location: return location_spec(x[0], x[1], x[2], x[3], x[4]);
  }
  throw std::invalid_argument("make_spec: bad model kind");
}

/// Set one parameter by name; used by the region-grid lattice.
inline ModelSpec with_param(const ModelSpec& spec, const std::string& name, double value) {
  auto vals = param_values(spec);
  const auto& names = param_names(spec.kind());
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) {
      vals[i] = value;
      return make_spec(spec.kind(), vals);
    }
  }
  throw ConfigError("unknown parameter name '" + name + "' for model " + to_string(spec.kind()));
}

/// Full list of violated admissibility constraints; empty means OK.
inline std::vector<std::string> param_validate(const ModelSpec& spec) {
  std::vector<std::string> out;
  auto finite = [&](double x, const char* name) {
    if (!std::isfinite(x)) out.push_back(std::string(name) + " must be finite");
  };
  switch (spec.kind()) {
    case ModelKind::beta_t_garch: {
      const auto& p = spec.garch();
      finite(p.omega, "omega"); finite(p.beta, "beta"); finite(p.alpha, "alpha");
      finite(p.gamma, "gamma"); finite(p.v, "v");
      if (!out.empty()) return out;
      if (!(p.omega > 0.0)) out.push_back("omega > 0 violated");
      if (!(p.beta >= 0.0)) out.push_back("beta >= 0 violated");
      if (!(p.beta < 1.0)) out.push_back("beta < 1 violated");
      if (!(p.alpha >= 0.0)) out.push_back("alpha >= 0 violated");
      if (!(p.gamma >= -p.alpha)) out.push_back("gamma >= -alpha violated");
      if (!(p.v > 2.0)) out.push_back("v > 2 violated");
      if (out.empty() && !(std::isfinite(p.omega_bar()) && p.omega_bar() > 0.0))
        out.push_back("omega/(1-beta) must be finite and positive");
      break;
    }
    case ModelKind::tv_ar: {
      const auto& p = spec.tv_ar();
      finite(p.omega, "omega"); finite(p.beta, "beta"); finite(p.alpha, "alpha");
      finite(p.sigma, "sigma"); finite(p.v, "v");
      if (!out.empty()) return out;
      if (!(p.sigma > 0.0)) out.push_back("sigma > 0 violated");
      if (!(p.v > 0.0)) out.push_back("v > 0 violated");
      break;
    }
    case ModelKind::t_location: {
      const auto& p = spec.location();
      finite(p.omega, "omega"); finite(p.beta, "beta"); finite(p.alpha, "alpha");
      finite(p.sigma, "sigma"); finite(p.v, "v");
      if (!out.empty()) return out;
      if (!(std::fabs(p.beta) < 1.0)) out.push_back("|beta| < 1 violated");
      if (!(p.sigma > 0.0)) out.push_back("sigma > 0 violated");
      if (!(p.v > 0.0)) out.push_back("v > 0 violated");
      break;
    }
  }
  return out;
}

inline bool param_ok(const ModelSpec& spec) { return param_validate(spec).empty(); }

namespace detail {

inline void check_window(std::span<const double> window, const ModelSpec& spec) {
  if (static_cast<int>(window.size()) != spec.lag_order() + 1)
    throw std::invalid_argument("window must hold the last k+1 observations");
  for (double y : window)
    if (!std::isfinite(y)) throw std::domain_error("non-finite observation in filter window");
}

/// Score kernel shared by tv_ar and t_location derivatives:
///   g(u) = v sigma^2 (u^2 - v sigma^2) / (u^2 + v sigma^2)^2,
/// with range [-1, 1/8]; the minimum sits at u = 0 and the maximum at
/// u^2 = 3 v sigma^2.
inline double score_kernel(double u, double vs2) {
  double u2 = u * u;
  double den = u2 + vs2;
  return vs2 * (u2 - vs2) / (den * den);
}

}  // namespace detail

/// One step of the update map phi(f, Y_t^k, theta).
/// `window` holds the last k+1 observations in time order, i.e.
/// window.back() = y_t and window[0] = y_{t-k}.
inline double filter_step(double f, std::span<const double> window, const ModelSpec& spec) {
  detail::check_window(window, spec);
  if (!std::isfinite(f)) throw std::domain_error("non-finite filter value");
  switch (spec.kind()) {
    case ModelKind::beta_t_garch: {
      const auto& p = spec.garch();
      double y = window.back();
      double news = (p.alpha + (y <= 0.0 ? p.gamma : 0.0)) * (p.v + 1.0) * y * y /
                    ((p.v - 2.0) + y * y / f);
      return p.omega + p.beta * f + news;
    }
    case ModelKind::tv_ar: {
      const auto& p = spec.tv_ar();
      double y = window[1];
      double ylag = window[0];
      double u = y - f * ylag;
      double vs2 = p.v * p.sigma * p.sigma;
      return p.omega + p.beta * f + p.alpha * u * ylag / (1.0 + u * u / vs2);
    }
    case ModelKind::t_location: {
      const auto& p = spec.location();
      double u = window.back() - f;
      double vs2 = p.v * p.sigma * p.sigma;
      return p.omega + p.beta * f + p.alpha * u / (1.0 + u * u / vs2);
    }
  }
  return f;
}

/// Analytic derivative of the update map with respect to f.
inline double filter_step_deriv(double f, std::span<const double> window, const ModelSpec& spec) {
  detail::check_window(window, spec);
  if (!std::isfinite(f)) throw std::domain_error("non-finite filter value");
  switch (spec.kind()) {
    case ModelKind::beta_t_garch: {
      const auto& p = spec.garch();
      double y = window.back();
      double y2 = y * y;
      double den = (p.v - 2.0) * f + y2;
      return p.beta +
             (p.alpha + (y <= 0.0 ? p.gamma : 0.0)) * (p.v + 1.0) * y2 * y2 / (den * den);
    }
    case ModelKind::tv_ar: {
      const auto& p = spec.tv_ar();
      double u = window[1] - f * window[0];
      double vs2 = p.v * p.sigma * p.sigma;
      return p.beta + p.alpha * window[0] * window[0] * detail::score_kernel(u, vs2);
    }
    case ModelKind::t_location: {
      const auto& p = spec.location();
      double vs2 = p.v * p.sigma * p.sigma;
      return p.beta + p.alpha * detail::score_kernel(window.back() - f, vs2);
    }
  }
  return 0.0;
}

/// Stochastic Lipschitz coefficient Lambda_t(theta): the closed-form supremum
/// of |d phi / d f| over the filter domain, given the window Y_t^k.
inline double lipschitz_coeff(std::span<const double> window, const ModelSpec& spec,
                              LocationBoundKind bound = LocationBoundKind::analytic) {
  detail::check_window(window, spec);
  switch (spec.kind()) {
    case ModelKind::beta_t_garch: {
      // The derivative decreases in f, so the sup is attained at omega_bar.
      const auto& p = spec.garch();
      double y = window.back();
      double y2 = y * y;
      double den = (p.v - 2.0) * p.omega_bar() + y2;
      return std::fabs(p.beta + (p.alpha + (y <= 0.0 ? p.gamma : 0.0)) * (p.v + 1.0) *
                                    y2 * y2 / (den * den));
    }
    case ModelKind::tv_ar: {
      // As f sweeps the real line the kernel attains its global extrema -1
      // and 1/8.
      const auto& p = spec.tv_ar();
      double a = p.alpha * window[0] * window[0];
      return std::max(std::fabs(p.beta - a), std::fabs(p.beta + a / 8.0));
    }
    case ModelKind::t_location: {
      const auto& p = spec.location();
      double y = window.back();
      double vs2 = p.v * p.sigma * p.sigma;
      FilterDomain dom = filter_domain(spec, bound);
      double lo = dom.lower, hi = dom.upper;
      double peak = std::sqrt(3.0 * vs2);
      // Extremes of the kernel over u = y - f, f in [lo, hi].
      double s_at_lo = detail::score_kernel(y - lo, vs2);
      double s_at_hi = detail::score_kernel(y - hi, vs2);
      double s_min = (y >= lo && y <= hi) ? -1.0 : std::min(s_at_hi, s_at_lo);
      bool peak_inside = (y - peak >= lo && y - peak <= hi) ||
                         (y + peak >= lo && y + peak <= hi);
      double s_max = peak_inside ? 0.125 : std::max(s_at_hi, s_at_lo);
      double z1 = p.beta + p.alpha * s_min;
      double z2 = p.beta + p.alpha * s_max;
      return std::max(std::fabs(z1), std::fabs(z2));
    }
  }
  return 0.0;
}

/// Data-free Lipschitz bound for the location model, sup over y as well:
/// max(|beta - alpha|, |beta + alpha/8|).
inline double location_sup_bound(const TLocationParams& p) {
  return std::max(std::fabs(p.beta - p.alpha), std::fabs(p.beta + p.alpha / 8.0));
}

namespace detail {

/// Constant part of the Beta-t-GARCH conditional log-density,
/// log Gamma((v+1)/2) - log Gamma(v/2) - log sqrt((v-2) pi).
inline double garch_logdensity_const(double v) {
  return log_gamma(0.5 * (v + 1.0)) - log_gamma(0.5 * v) -
         0.5 * std::log((v - 2.0) * M_PI);
}

inline double garch_logdensity(double y, double f, double v, double log_const) {
  return log_const - 0.5 * std::log(f) -
         0.5 * (v + 1.0) * std::log1p(y * y / ((v - 2.0) * f));
}

}  // namespace detail

/// Conditional log-density log p(y_t | f_t, theta). For tv_ar the density
/// also conditions on y_{t-1}, provided through `window` exactly as in
/// filter_step (window.back() = y_t).
inline double log_density(std::span<const double> window, double f, const ModelSpec& spec) {
  detail::check_window(window, spec);
  if (!std::isfinite(f)) throw std::domain_error("non-finite filter value");
  switch (spec.kind()) {
    case ModelKind::beta_t_garch: {
      const auto& p = spec.garch();
      if (!(f > 0.0)) throw std::domain_error("conditional variance must be positive");
      return detail::garch_logdensity(window.back(), f, p.v,
                                      detail::garch_logdensity_const(p.v));
    }
    case ModelKind::tv_ar: {
      const auto& p = spec.tv_ar();
      double resid = (window[1] - f * window[0]) / p.sigma;
      return student_t_logpdf(resid, p.v) - std::log(p.sigma);
    }
    case ModelKind::t_location: {
      const auto& p = spec.location();
      double resid = (window.back() - f) / p.sigma;
      return student_t_logpdf(resid, p.v) - std::log(p.sigma);
    }
  }
  return 0.0;
}

/// Convenience overload for the lag-free models (window is just {y}).
inline double log_density(double y, double f, const ModelSpec& spec) {
  if (spec.lag_order() != 0)
    throw std::invalid_argument("log_density(y, f, spec): model needs a lagged window");
  const double w[2] = {y, y};
  return log_density(std::span<const double>(w, 1), f, spec);
}

// ---------------------------------------------------------------------------
// Parameter transforms: a smooth bijection between the (interior of the)
// admissible set and R^5, so derivative-free search can roam freely.
//   positive parameters  -> log (with a small floor inset where estimation
//                           needs one),
//   bounded parameters   -> scaled logit,
//   v > 2 (garch)        -> shift + log.
// For the garch pair (alpha, gamma) the transform works on (alpha,
// alpha + gamma), both positive, which enforces gamma >= -alpha.
// ---------------------------------------------------------------------------

namespace detail {

constexpr double kOmegaInset = 1e-8;   // omega >= 1e-8
constexpr double kDofInset = 1e-6;     // garch v >= 2 + 1e-6
constexpr double kBetaUpper = 1.0 - 1e-6;

// Clamp before exponentiation so untransform never overflows, even through
// derived quantities like omega/(1-beta) with beta at its upper inset.
inline double safe_exp(double x) { return std::exp(std::clamp(x, -350.0, 350.0)); }

inline double logit(double q) { return std::log(q / (1.0 - q)); }
inline double expit(double x) {
  if (x >= 0.0) {
    double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace detail

/// Map an admissible parameter vector to unconstrained coordinates.
inline std::vector<double> param_transform(const ModelSpec& spec) {
  using namespace detail;
  switch (spec.kind()) {
    case ModelKind::beta_t_garch: {
      const auto& p = spec.garch();
      return {std::log(p.omega - kOmegaInset),
              logit(p.beta / kBetaUpper),
              std::log(p.alpha),
              std::log(p.alpha + p.gamma),
              std::log(p.v - 2.0 - kDofInset)};
    }
    case ModelKind::tv_ar: {
      const auto& p = spec.tv_ar();
      return {p.omega, p.beta, p.alpha, std::log(p.sigma), std::log(p.v)};
    }
    case ModelKind::t_location: {
      const auto& p = spec.location();
      return {p.omega, logit((p.beta / kBetaUpper + 1.0) / 2.0), p.alpha,
              std::log(p.sigma), std::log(p.v)};
    }
  }
  return {};
}

/// Inverse of param_transform; its range is admissible by construction.
inline ModelSpec param_untransform(std::span<const double> x, ModelKind kind) {
  using namespace detail;
  if (x.size() != 5) throw std::invalid_argument("param_untransform: expected 5 coordinates");
  switch (kind) {
    case ModelKind::beta_t_garch: {
      double omega = kOmegaInset + safe_exp(x[0]);
      double beta = kBetaUpper * expit(x[1]);
      double alpha = safe_exp(x[2]);
      double alpha_plus_gamma = safe_exp(x[3]);
      double v = 2.0 + kDofInset + safe_exp(x[4]);
      return garch_spec(omega, beta, alpha, alpha_plus_gamma - alpha, v);
    }
    case ModelKind::tv_ar:
      return tv_ar_spec(x[0], x[1], x[2], safe_exp(x[3]), safe_exp(x[4]));
    case ModelKind::t_location: {
      double beta = kBetaUpper * (2.0 * expit(x[1]) - 1.0);
      return location_spec(x[0], beta, x[2], safe_exp(x[3]), safe_exp(x[4]));
    }
  }
  throw std::invalid_argument("param_untransform: bad model kind");
}

// ---------------------------------------------------------------------------
// Series alignment. A series passed to the filtering/estimation layers holds
// k+1 pre-sample observations followed by the n in-sample ones:
//   { y_{-k}, ..., y_0, y_1, ..., y_n },   n = size - k - 1.
// The pre-sample values feed the first update f_1 = phi(f_0, Y_0^k, theta);
// likelihood terms run over t = 1..n.
// ---------------------------------------------------------------------------

class SeriesView {
 public:
  SeriesView(std::span<const double> data, const ModelSpec& spec)
      : data_(data), k_(spec.lag_order()) {
    if (static_cast<int>(data.size()) < k_ + 2)
      throw DataError("series too short: need at least k+2 observations (k = " +
                      std::to_string(k_) + ")");
  }

  int n() const { return static_cast<int>(data_.size()) - k_ - 1; }
  int lag_order() const { return k_; }

  /// Observation y_t, valid for t in [-k, n].
  double y(int t) const { return data_[static_cast<std::size_t>(t + k_)]; }

  /// Window Y_t^k in time order (window.back() = y_t), valid for t in [0, n].
  std::span<const double> window(int t) const {
    return data_.subspan(static_cast<std::size_t>(t), static_cast<std::size_t>(k_ + 1));
  }

  std::span<const double> raw() const { return data_; }

 private:
  std::span<const double> data_;
  int k_;
};

}  // namespace odml
