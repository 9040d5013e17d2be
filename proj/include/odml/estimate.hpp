#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "odml/filter.hpp"
#include "odml/invertibility.hpp"
#include "odml/math/rng.hpp"
#include "odml/model.hpp"

namespace odml {

struct OptimizerOptions {
  int max_iter = 2000;
  double tol_x = 1e-8;
  double tol_f = 1e-10;  // relative to 1 + |best value|
  int restarts = 2;     // simplex re-polishes from the incumbent best point
  std::vector<double> penalty_weights{1e2, 1e4, 1e6};
  std::uint64_t seed = 0;
  double init_step = 0.25;  // initial simplex edge in transformed space
};

struct NmResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

/// Nelder-Mead simplex minimizer (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2). Deterministic: identical inputs give bit-identical output.
/// Non-finite objective values during the search are treated as +inf; a
/// non-finite value at x0 is an error.
template <class F>
NmResult nelder_mead(F&& objective, std::span<const double> x0, const OptimizerOptions& opts) {
  const std::size_t dim = x0.size();
  if (dim == 0) throw std::invalid_argument("nelder_mead: empty start point");

  auto eval = [&](const std::vector<double>& x) {
    double v = objective(std::span<const double>(x));
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<std::vector<double>> simplex(dim + 1, std::vector<double>(x0.begin(), x0.end()));
  std::vector<double> fv(dim + 1);
  fv[0] = objective(x0);
  if (!std::isfinite(fv[0]))
    throw NumericalError("nelder_mead: objective is not finite at the start point");
  for (std::size_t i = 0; i < dim; ++i) {
    simplex[i + 1][i] += opts.init_step;
    fv[i + 1] = eval(simplex[i + 1]);
  }

  std::vector<std::size_t> order(dim + 1);
  NmResult res;
  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    for (std::size_t i = 0; i <= dim; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });

    const std::size_t best = order[0], worst = order[dim], second = order[dim - 1];

    double diam = 0.0;
    for (std::size_t i = 1; i <= dim; ++i)
      for (std::size_t j = 0; j < dim; ++j)
        diam = std::max(diam, std::fabs(simplex[order[i]][j] - simplex[best][j]));
    double spread = fv[worst] - fv[best];
    if (diam < opts.tol_x && spread <= opts.tol_f * (1.0 + std::fabs(fv[best]))) {
      res.converged = true;
      break;
    }

    std::vector<double> centroid(dim, 0.0);
    for (std::size_t i = 0; i <= dim; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < dim; ++j) centroid[j] += simplex[i][j];
    }
    for (double& c : centroid) c /= static_cast<double>(dim);

    auto blend = [&](double coef) {
      std::vector<double> x(dim);
      for (std::size_t j = 0; j < dim; ++j)
        x[j] = centroid[j] + coef * (centroid[j] - simplex[worst][j]);
      return x;
    };

    std::vector<double> xr = blend(1.0);
    double fr = eval(xr);
    if (fr < fv[best]) {
      std::vector<double> xe = blend(2.0);
      double fe = eval(xe);
      if (fe < fr) { simplex[worst] = std::move(xe); fv[worst] = fe; }
      else { simplex[worst] = std::move(xr); fv[worst] = fr; }
    } else if (fr < fv[second]) {
      simplex[worst] = std::move(xr);
      fv[worst] = fr;
    } else {
      bool outside = fr < fv[worst];
      std::vector<double> xc = blend(outside ? 0.5 : -0.5);
      double fc = eval(xc);
      if (fc < (outside ? fr : fv[worst])) {
        simplex[worst] = std::move(xc);
        fv[worst] = fc;
      } else {
        for (std::size_t i = 1; i <= dim; ++i) {
          std::size_t idx = order[i];
          for (std::size_t j = 0; j < dim; ++j)
            simplex[idx][j] = simplex[order[0]][j] + 0.5 * (simplex[idx][j] - simplex[order[0]][j]);
          fv[idx] = eval(simplex[idx]);
        }
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i <= dim; ++i)
    if (fv[i] < fv[best]) best = i;
  res.x = simplex[best];
  res.value = fv[best];
  res.iterations = iter;
  return res;
}

/// Nelder-Mead with a few re-polishes: each restart rebuilds a fresh simplex
/// around the incumbent answer, which shakes off premature stagnation.
template <class F>
NmResult nelder_mead_polished(F&& objective, std::span<const double> x0,
                              const OptimizerOptions& opts) {
  NmResult best = nelder_mead(objective, x0, opts);
  for (int r = 0; r < opts.restarts; ++r) {
    OptimizerOptions o = opts;
    o.init_step = opts.init_step * std::pow(0.1, r + 1);
    NmResult next = nelder_mead(objective, best.x, o);
    next.iterations += best.iterations;
    if (next.value <= best.value) {
      next.converged = next.converged || best.converged;
      best = std::move(next);
    } else {
      best.iterations = next.iterations;
    }
  }
  return best;
}

/// Best-of-n-starts minimization of a raw objective over an anchor list:
/// anchors are used verbatim and cycled, with seeded Gaussian jitter once the
/// list is exhausted. Ties break on the earlier start.
template <class F>
NmResult nm_multi_start(F&& objective, const std::vector<std::vector<double>>& anchors,
                        int n_starts, std::uint64_t seed, const OptimizerOptions& opts = {}) {
  if (anchors.empty()) throw std::invalid_argument("nm_multi_start: no anchors");
  if (n_starts < 1) throw std::invalid_argument("nm_multi_start: n_starts must be >= 1");
  std::optional<NmResult> best;
  for (int i = 0; i < n_starts; ++i) {
    std::vector<double> x0 = anchors[static_cast<std::size_t>(i) % anchors.size()];
    if (i >= static_cast<int>(anchors.size())) {
      SplitMix64 rng(SplitMix64::derive(seed, static_cast<std::uint64_t>(i)));
      for (double& xi : x0) xi += 0.5 * rng.normal();
    }
    NmResult cand;
    try {
      cand = nelder_mead_polished(objective, x0, opts);
    } catch (const NumericalError&) {
      continue;
    }
    if (!best || cand.value < best->value) best = std::move(cand);
  }
  if (!best) throw NumericalError("nm_multi_start: every start failed");
  return *best;
}

/// Outcome of a maximum-likelihood fit.
struct EstimationResult {
  ModelSpec theta_hat;
  double loglik = -std::numeric_limits<double>::infinity();  // averaged over observations
  double lyapunov_at_hat = std::numeric_limits<double>::quiet_NaN();
  bool constrained = false;
  double delta = 0.0;  // margin used when constrained
  int iterations = 0;
  bool converged = false;
  int restarts_used = 1;
  std::optional<std::vector<double>> std_errors;  // per parameter, estimation order
  bool hessian_failed = false;
  double f0_used = std::numeric_limits<double>::quiet_NaN();
  std::string status = "converged";
};

namespace detail {

/// Estimation keeps the constrained iterate strictly inside the region so the
/// post-hoc audit (mean log Lambda <= -delta, recomputed exactly) passes.
constexpr double kPenaltyMargin = 1e-4;

/// Documented start lattice, in parameter space; transformed on use.
inline const std::array<std::array<double, 5>, 8>& anchor_params(ModelKind kind) {
  static const std::array<std::array<double, 5>, 8> garch = {{
      {0.10, 0.50, 0.10, 0.05, 8.0},
      {0.05, 0.90, 0.05, 0.05, 8.0},
      {0.20, 0.70, 0.10, 0.10, 6.0},
      {0.50, 0.30, 0.20, 0.10, 10.0},
      {0.02, 0.95, 0.03, 0.03, 12.0},
      {1.00, 0.60, 0.15, 0.00, 7.0},
      {0.10, 0.80, 0.02, 0.20, 5.0},
      {0.30, 0.40, 0.30, 0.15, 20.0},
  }};
  static const std::array<std::array<double, 5>, 8> tvar = {{
      {0.00, 0.50, 0.05, 1.0, 8.0},
      {0.00, 0.90, 0.02, 1.0, 8.0},
      {0.05, 0.70, 0.10, 0.5, 5.0},
      {0.00, 0.30, 0.01, 2.0, 10.0},
      {0.02, 0.95, 0.05, 1.0, 6.0},
      {-0.02, 0.60, 0.20, 0.2, 12.0},
      {0.00, 0.80, 0.005, 5.0, 4.0},
      {0.10, 0.20, 0.05, 1.0, 30.0},
  }};
  static const std::array<std::array<double, 5>, 8> loc = {{
      {0.00, 0.50, 0.30, 1.0, 8.0},
      {0.00, 0.90, 0.10, 1.0, 8.0},
      {0.10, 0.70, 0.50, 0.5, 5.0},
      {0.00, 0.30, 0.20, 2.0, 10.0},
      {0.05, 0.95, 0.05, 1.0, 6.0},
      {-0.05, 0.60, 1.00, 0.2, 12.0},
      {0.00, 0.80, 0.05, 5.0, 4.0},
      {0.20, 0.20, 0.40, 1.0, 30.0},
  }};
  switch (kind) {
    case ModelKind::beta_t_garch: return garch;
    case ModelKind::tv_ar: return tvar;
    case ModelKind::t_location: return loc;
  }
  return garch;
}

inline std::vector<double> anchor_transformed(ModelKind kind, int i) {
  const auto& a = anchor_params(kind)[static_cast<std::size_t>(i)];
  return param_transform(make_spec(kind, std::span<const double>(a.data(), 5)));
}

/// Start point schedule: the 8 lattice anchors verbatim, then jittered
/// anchors with a per-index derived sub-seed. Point i never depends on
/// n_starts, so enlarging the budget only extends the schedule.
inline std::vector<double> start_point(ModelKind kind, int i, std::uint64_t seed) {
  std::vector<double> x = anchor_transformed(kind, i % 8);
  if (i >= 8) {
    SplitMix64 rng(SplitMix64::derive(seed, static_cast<std::uint64_t>(i)));
    for (double& xi : x) xi += 0.5 * rng.normal();
  }
  return x;
}

/// Data statistic behind the default initialization, computed once per fit.
inline double init_base(std::span<const double> series, ModelKind kind) {
  switch (kind) {
    case ModelKind::beta_t_garch: return sample_variance(series);
    case ModelKind::tv_ar: return 0.0;
    case ModelKind::t_location: return sample_median(series);
  }
  return 0.0;
}

inline double effective_init(const ModelSpec& spec, double base) {
  return filter_domain(spec).clamp(base);
}

/// Negative averaged log-likelihood in transformed coordinates; any domain
/// failure or non-finite value maps to +inf so the search simply backs away.
struct LikelihoodObjective {
  std::span<const double> series;
  ModelKind kind;
  double f0_base;

  double operator()(std::span<const double> x) const {
    ModelSpec spec = param_untransform(x, kind);
    if (!param_ok(spec)) return std::numeric_limits<double>::infinity();
    try {
      double ll = log_likelihood(series, spec, effective_init(spec, f0_base));
      return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
  }
};

inline EstimationResult build_result(std::span<const double> series, ModelKind kind,
                                     const NmResult& nm, double f0_base) {
  EstimationResult res;
  res.theta_hat = param_untransform(nm.x, kind);
  res.iterations = nm.iterations;
  res.converged = nm.converged && std::isfinite(nm.value);
  res.loglik = -nm.value;
  res.f0_used = effective_init(res.theta_hat, f0_base);
  res.lyapunov_at_hat = empirical_lyapunov(series, res.theta_hat);
  res.status = res.converged ? "converged" : "max_iter";
  return res;
}

}  // namespace detail

/// Plain ML: maximize the averaged log-likelihood over the transformed
/// (unconstrained) parameter space. `start` defaults to the first lattice
/// anchor; `f0` defaults to the model's data-driven initialization.
inline EstimationResult fit_ml(std::span<const double> series, ModelKind kind,
                               std::optional<ModelSpec> start = {},
                               std::optional<double> f0 = {},
                               const OptimizerOptions& opts = {}) {
  if (series.size() < 50) throw DataError("fit_ml: need at least 50 observations");
  if (start && !param_ok(*start))
    throw std::invalid_argument("fit_ml: start point is inadmissible");

  double f0_base = f0 ? *f0 : detail::init_base(series, kind);
  detail::LikelihoodObjective obj{series, kind, f0_base};
  std::vector<double> x0 =
      start ? param_transform(*start) : detail::anchor_transformed(kind, 0);
  NmResult nm = nelder_mead_polished(obj, x0, opts);
  return detail::build_result(series, kind, nm, f0_base);
}

/// ML restricted to the estimated region: maximize the likelihood subject to
/// (1/n) sum log Lambda_t(theta) <= -delta, through an exterior quadratic
/// penalty with escalating weights and a final feasibility audit. The reported
/// estimate satisfies the constraint exactly or carries status "infeasible".
inline EstimationResult fit_ml_constrained(std::span<const double> series, ModelKind kind,
                                           double delta, std::optional<ModelSpec> start = {},
                                           std::optional<double> f0 = {},
                                           const OptimizerOptions& opts = {}) {
  if (!(delta > 0.0)) throw std::invalid_argument("fit_ml_constrained: delta must be positive");
  if (series.size() < 50) throw DataError("fit_ml_constrained: need at least 50 observations");
  if (start && !param_ok(*start))
    throw std::invalid_argument("fit_ml_constrained: start point is inadmissible");

  double f0_base = f0 ? *f0 : detail::init_base(series, kind);
  detail::LikelihoodObjective base{series, kind, f0_base};

  auto penalized = [&](double weight) {
    return [&, weight](std::span<const double> x) {
      double nll = base(x);
      if (!std::isfinite(nll)) return nll;
      ModelSpec spec = param_untransform(x, kind);
      double lyap;
      try {
        lyap = empirical_lyapunov(series, spec);
      } catch (const std::exception&) {
        return std::numeric_limits<double>::infinity();
      }
      double excess = std::max(0.0, lyap + delta + detail::kPenaltyMargin);
      return nll + weight * excess * excess;
    };
  };

  if (opts.penalty_weights.empty())
    throw std::invalid_argument("fit_ml_constrained: empty penalty weight schedule");

  std::vector<double> x = start ? param_transform(*start) : detail::anchor_transformed(kind, 0);
  NmResult nm;
  nm.x = x;
  int total_iter = 0;
  for (double w : opts.penalty_weights) {
    nm = nelder_mead_polished(penalized(w), x, opts);
    x = nm.x;
    total_iter += nm.iterations;
  }

  EstimationResult res = detail::build_result(series, kind, nm, f0_base);
  res.loglik = log_likelihood(series, res.theta_hat,
                              detail::effective_init(res.theta_hat, f0_base));
  res.constrained = true;
  res.delta = delta;
  res.iterations = total_iter;

  if (!(res.lyapunov_at_hat <= -delta)) {
    // One harder pass before giving up.
    nm = nelder_mead_polished(penalized(1e8), x, opts);
    total_iter += nm.iterations;
    res = detail::build_result(series, kind, nm, f0_base);
    res.loglik = log_likelihood(series, res.theta_hat,
                                detail::effective_init(res.theta_hat, f0_base));
    res.constrained = true;
    res.delta = delta;
    res.iterations = total_iter;
    if (!(res.lyapunov_at_hat <= -delta)) {
      res.converged = false;
      res.status = "infeasible";
    }
  }
  return res;
}

/// Best-of-n-starts estimation over the documented anchor lattice plus
/// seeded jitter. Returns the best converged (and, when constrained,
/// feasible) result; ties break on the lower start index.
inline EstimationResult multi_start(std::span<const double> series, ModelKind kind,
                                    int n_starts, std::uint64_t seed, bool constrained = false,
                                    double delta = 0.01, const OptimizerOptions& opts = {}) {
  if (n_starts < 1) throw std::invalid_argument("multi_start: n_starts must be >= 1");

  std::optional<EstimationResult> best;
  for (int i = 0; i < n_starts; ++i) {
    std::vector<double> x0 = detail::start_point(kind, i, seed);
    ModelSpec start = param_untransform(x0, kind);
    EstimationResult cand;
    try {
      cand = constrained ? fit_ml_constrained(series, kind, delta, start, {}, opts)
                         : fit_ml(series, kind, start, {}, opts);
    } catch (const NumericalError&) {
      continue;
    }
    bool usable = cand.converged && (!constrained || cand.lyapunov_at_hat <= -delta);
    if (!usable) continue;
    if (!best || cand.loglik > best->loglik) best = std::move(cand);
  }
  if (!best)
    throw NumericalError("multi_start: no start produced a converged" +
                         std::string(constrained ? " feasible" : "") + " estimate");
  best->restarts_used = n_starts;
  return *best;
}

// ---------------------------------------------------------------------------
// Numerical standard errors.
// ---------------------------------------------------------------------------

namespace detail {

/// Cholesky-based inverse of a small symmetric positive definite matrix
/// (row-major). Returns false when the factorization fails.
inline bool spd_inverse(std::vector<double>& a, std::size_t n) {
  std::vector<double> l(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
      if (i == j) {
        if (!(s > 0.0)) return false;
        l[i * n + i] = std::sqrt(s);
      } else {
        l[i * n + j] = s / l[j * n + j];
      }
    }
  }
  // Invert L in place, then form A^{-1} = L^{-T} L^{-1}.
  std::vector<double> inv_l(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    inv_l[i * n + i] = 1.0 / l[i * n + i];
    for (std::size_t j = 0; j < i; ++j) {
      double s = 0.0;
      for (std::size_t k = j; k < i; ++k) s -= l[i * n + k] * inv_l[k * n + j];
      inv_l[i * n + j] = s / l[i * n + i];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = i; k < n; ++k) s += inv_l[k * n + i] * inv_l[k * n + j];
      a[i * n + j] = a[j * n + i] = s;
    }
  return true;
}

}  // namespace detail

/// Standard errors from the inverse negative numerical Hessian of the total
/// log-likelihood n * L_n at theta_hat, central differences with a 1e-4
/// relative step in the original parameterization. `free_params` restricts
/// the Hessian to a subset of coordinates (all five by default); fixed
/// coordinates report NaN. Returns nullopt when the Hessian is not negative
/// definite or cannot be evaluated.
inline std::optional<std::vector<double>> standard_errors(
    std::span<const double> series, const EstimationResult& result,
    std::span<const std::size_t> free_params = {}) {
  const ModelKind kind = result.theta_hat.kind();
  const std::vector<double> theta = param_values(result.theta_hat);
  std::vector<std::size_t> free(free_params.begin(), free_params.end());
  if (free.empty()) free = {0, 1, 2, 3, 4};

  SeriesView view(series, result.theta_hat);
  const double n = static_cast<double>(view.n());
  const double f0 = result.f0_used;

  auto total_loglik = [&](const std::vector<double>& p) {
    ModelSpec spec = make_spec(kind, p);
    if (!param_ok(spec)) throw std::domain_error("standard_errors: left admissible set");
    return n * log_likelihood(series, spec, filter_domain(spec).clamp(f0));
  };

  const std::size_t m = free.size();
  std::vector<double> h(m);
  for (std::size_t i = 0; i < m; ++i)
    h[i] = 1e-4 * std::max(std::fabs(theta[free[i]]), 1e-3);

  std::vector<double> hess(m * m, 0.0);
  try {
    double f00 = total_loglik(theta);
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<double> p = theta;
      p[free[i]] = theta[free[i]] + h[i];
      double fp = total_loglik(p);
      p[free[i]] = theta[free[i]] - h[i];
      double fm = total_loglik(p);
      hess[i * m + i] = (fp - 2.0 * f00 + fm) / (h[i] * h[i]);
      for (std::size_t j = i + 1; j < m; ++j) {
        std::vector<double> q = theta;
        q[free[i]] = theta[free[i]] + h[i];
        q[free[j]] = theta[free[j]] + h[j];
        double fpp = total_loglik(q);
        q[free[j]] = theta[free[j]] - h[j];
        double fpm = total_loglik(q);
        q[free[i]] = theta[free[i]] - h[i];
        q[free[j]] = theta[free[j]] + h[j];
        double fmp = total_loglik(q);
        q[free[j]] = theta[free[j]] - h[j];
        double fmm = total_loglik(q);
        double hij = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
        hess[i * m + j] = hess[j * m + i] = hij;
      }
    }
  } catch (const std::exception&) {
    return std::nullopt;
  }

  for (double& v : hess) v = -v;  // observed information
  if (!detail::spd_inverse(hess, m)) return std::nullopt;

  std::vector<double> se(5, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < m; ++i) {
    double var = hess[i * m + i];
    if (!(var >= 0.0)) return std::nullopt;
    se[free[i]] = std::sqrt(var);
  }
  return se;
}

/// Compute standard errors and attach them to the result (flagging failure).
inline void attach_standard_errors(std::span<const double> series, EstimationResult& result) {
  auto se = standard_errors(series, result);
  result.std_errors = se;
  result.hessian_failed = !se.has_value();
}

}  // namespace odml
