#pragma once

// Shared random generators for property tests.

#include <random>
#include <vector>

#include "odml/model.hpp"

namespace fixtures {

using odml::ModelKind;
using odml::ModelSpec;

struct Draw {
  std::mt19937 gen;
  explicit Draw(unsigned seed) : gen(seed) {}

  double uniform(double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(gen);
  }
  double normal(double sd = 1.0) {
    return std::normal_distribution<double>(0.0, sd)(gen);
  }

  /// Admissible interior garch parameters.
  ModelSpec garch() {
    double omega = uniform(0.01, 0.8);
    double beta = uniform(0.02, 0.97);
    double alpha = uniform(0.005, 0.6);
    double gamma = uniform(-0.8 * alpha, 0.6);
    double v = uniform(2.3, 25.0);
    return odml::garch_spec(omega, beta, alpha, gamma, v);
  }

  ModelSpec tv_ar() {
    return odml::tv_ar_spec(uniform(-0.2, 0.2), uniform(-0.95, 0.95), uniform(-0.4, 0.4),
                            uniform(0.2, 2.5), uniform(0.8, 20.0));
  }

  ModelSpec location() {
    return odml::location_spec(uniform(-1.0, 1.0), uniform(-0.9, 0.9), uniform(-1.0, 1.0),
                               uniform(0.2, 2.5), uniform(0.8, 20.0));
  }

  ModelSpec spec(ModelKind kind) {
    switch (kind) {
      case ModelKind::beta_t_garch: return garch();
      case ModelKind::tv_ar: return tv_ar();
      case ModelKind::t_location: return location();
    }
    return garch();
  }

  /// A window of k+1 observations on a return-like scale.
  std::vector<double> window(const ModelSpec& spec) {
    std::vector<double> w(static_cast<std::size_t>(spec.lag_order()) + 1);
    for (double& y : w) y = normal(1.2);
    return w;
  }

  /// An interior point of the filter domain.
  double interior_f(const ModelSpec& spec) {
    odml::FilterDomain dom = odml::filter_domain(spec);
    double lo = std::isfinite(dom.lower) ? dom.lower : -5.0;
    double hi = std::isfinite(dom.upper) ? dom.upper : lo + 10.0;
    double pad = 1e-3 * (hi - lo);
    return uniform(lo + pad, hi - pad);
  }
};

}  // namespace fixtures
