#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "odml/math/rng.hpp"
#include "odml/model.hpp"

namespace odml {

/// Simulated sample: k+1 pre-sample observations followed by y_1..y_n, plus
/// the true time-varying parameter f^o_t for t = 1..n.
struct SimOutput {
  std::vector<double> series;     // y_{-k}, ..., y_0, y_1, ..., y_n
  std::vector<double> true_path;  // f^o_1, ..., f^o_n
  std::uint64_t seed = 0;
  int burn_in = 0;
};

namespace detail {

/// Variance-one Student-t draw used by the Beta-t-GARCH data generating
/// process (requires v > 2); the other models use the raw t_v.
inline double standardized_t(SplitMix64& rng, double v) {
  return rng.student_t(v) * std::sqrt((v - 2.0) / v);
}

}  // namespace detail

/// Simulate the model as a data generating process. The true recursion is
/// started at the deterministic level omega/(1-beta), run through `burn_in`
/// steps, and then recorded. Identical arguments give bit-identical output.
inline SimOutput simulate(const ModelSpec& spec, int n, std::uint64_t seed, int burn_in = 1000) {
  if (!param_ok(spec)) throw std::invalid_argument("simulate: inadmissible parameters");
  if (n < 1) throw std::invalid_argument("simulate: n must be >= 1");
  if (burn_in < 0) throw std::invalid_argument("simulate: burn_in must be >= 0");

  const int k = spec.lag_order();
  SplitMix64 rng(SplitMix64::derive(seed, 0));
  SimOutput out;
  out.seed = seed;
  out.burn_in = burn_in;
  out.series.reserve(static_cast<std::size_t>(n + k + 1));
  out.true_path.reserve(static_cast<std::size_t>(n));

  const ModelKind kind = spec.kind();
  double f;
  switch (kind) {
    case ModelKind::beta_t_garch: f = spec.garch().omega_bar(); break;
    case ModelKind::tv_ar: f = spec.tv_ar().omega / (1.0 - spec.tv_ar().beta); break;
    case ModelKind::t_location:
      f = spec.location().omega / (1.0 - spec.location().beta);
      break;
    default: f = 0.0;
  }
  if (!std::isfinite(f))
    throw NumericalError("simulate: unconditional level omega/(1-beta) is not finite");

  double y_lag = 0.0;  // only consulted by tv_ar
  const int total = burn_in + k + 1 + n;
  for (int step = 0; step < total; ++step) {
    double y;
    switch (kind) {
      case ModelKind::beta_t_garch:
        y = std::sqrt(f) * detail::standardized_t(rng, spec.garch().v);
        break;
      case ModelKind::tv_ar:
        y = f * y_lag + spec.tv_ar().sigma * rng.student_t(spec.tv_ar().v);
        break;
      case ModelKind::t_location:
        y = f + spec.location().sigma * rng.student_t(spec.location().v);
        break;
      default: y = 0.0;
    }

    if (step >= burn_in) {
      out.series.push_back(y);
      if (step >= burn_in + k + 1) out.true_path.push_back(f);
    }

    // Advance the true recursion with the window ending at this y.
    double window[2];
    if (k == 0) {
      window[0] = y;
    } else {
      window[0] = y_lag;
      window[1] = y;
    }
    f = filter_step(f, std::span<const double>(window, static_cast<std::size_t>(k) + 1), spec);
    if (!std::isfinite(f) || std::fabs(f) > 1e12 || !std::isfinite(y) || std::fabs(y) > 1e12)
      throw NumericalError("simulate: true path exploded (non-stationary parameters?)");
    y_lag = y;
  }
  return out;
}

/// Monte Carlo diagnostics for the Beta-t-GARCH data generating process:
/// E log c_t governs strict stationarity (negative is required), E c_t^z
/// bounds moments, and beta + alpha + gamma/2 < 1 is the simple sufficient
/// restriction.
struct StationarityReport {
  double e_log_c = 0.0;
  double e_log_c_se = 0.0;
  double sufficient_check = 0.0;             // beta + alpha + gamma/2
  std::map<double, double> moment_checks;    // z -> E c_t^z
  std::map<double, double> moment_checks_se;
  long mc_draws = 0;
};

/// Estimate E log c_t and E c_t^z with c_t = beta + (alpha + gamma d_t)(v+1) b_t,
/// b_t ~ Beta(1/2, v/2) and d_t ~ Bernoulli(1/2) independent. Draws are
/// sharded on a fixed schedule (4096 per shard, sub-seed derived per shard),
/// so the result does not depend on how workers are assigned.
inline StationarityReport stationarity_report(const BetaTGarchParams& p,
                                              long mc_draws = 1000000,
                                              std::uint64_t seed = 1,
                                              std::span<const double> moment_orders = {}) {
  if (mc_draws < 1000) throw std::invalid_argument("stationarity_report: mc_draws >= 1000");
  if (!param_ok(ModelSpec{p})) throw std::invalid_argument("stationarity_report: bad params");

  constexpr long kShard = 4096;
  StationarityReport rep;
  rep.sufficient_check = p.beta + p.alpha + p.gamma / 2.0;
  rep.mc_draws = mc_draws;

  if (p.alpha == 0.0 && p.gamma == 0.0) {
    // c_t = beta deterministically; no Monte Carlo noise.
    rep.e_log_c = std::log(p.beta);
    rep.e_log_c_se = 0.0;
    for (double z : moment_orders) {
      rep.moment_checks[z] = std::pow(p.beta, z);
      rep.moment_checks_se[z] = 0.0;
    }
    return rep;
  }

  const std::size_t nz = moment_orders.size();
  std::vector<double> zsum(nz, 0.0), zsumsq(nz, 0.0);
  double sum = 0.0, sumsq = 0.0;

  long done = 0;
  for (std::uint64_t shard = 0; done < mc_draws; ++shard) {
    SplitMix64 rng(SplitMix64::derive(seed, shard + 1));
    long batch = std::min(kShard, mc_draws - done);
    for (long i = 0; i < batch; ++i) {
      double z2 = rng.normal();
      z2 *= z2;
      double w = rng.gamma(0.5 * p.v) * 2.0;  // chi-square(v)
      double b = z2 / (z2 + w);               // Beta(1/2, v/2)
      double d = (rng.next_u64() & 1u) ? 1.0 : 0.0;
      double c = p.beta + (p.alpha + p.gamma * d) * (p.v + 1.0) * b;
      double lc = std::log(c);
      sum += lc;
      sumsq += lc * lc;
      for (std::size_t j = 0; j < nz; ++j) {
        double cz = std::pow(c, moment_orders[j]);
        zsum[j] += cz;
        zsumsq[j] += cz * cz;
      }
    }
    done += batch;
  }

  const double nd = static_cast<double>(mc_draws);
  rep.e_log_c = sum / nd;
  double var = std::max(0.0, sumsq / nd - rep.e_log_c * rep.e_log_c);
  rep.e_log_c_se = std::sqrt(var / nd);
  for (std::size_t j = 0; j < nz; ++j) {
    double m = zsum[j] / nd;
    double vz = std::max(0.0, zsumsq[j] / nd - m * m);
    rep.moment_checks[moment_orders[j]] = m;
    rep.moment_checks_se[moment_orders[j]] = std::sqrt(vz / nd);
  }
  return rep;
}

}  // namespace odml
