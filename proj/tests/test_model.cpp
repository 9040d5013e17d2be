#include <doctest.h>

#include <cmath>
#include <limits>

#include "odml/model.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace odml;

namespace {
const ModelKind kAllKinds[] = {ModelKind::beta_t_garch, ModelKind::tv_ar,
                               ModelKind::t_location};
}

TEST_CASE("param_validate accepts and rejects the documented cases") {
  CHECK(param_validate(garch_spec(0.1, 0.5, 0.1, 0.1, 6)).empty());
  auto bad = param_validate(garch_spec(0.1, 1.0, 0.1, 0.1, 6));
  REQUIRE(bad.size() == 1);
  CHECK(bad[0].find("beta < 1") != std::string::npos);
  CHECK(param_validate(garch_spec(0.058, 0.554, 0.000, 0.371, 7.417)).empty());

  CHECK(!param_validate(garch_spec(0.0, 0.5, 0.1, 0.1, 6)).empty());    // omega
  CHECK(!param_validate(garch_spec(0.1, 0.5, -0.1, 0.1, 6)).empty());   // alpha
  CHECK(!param_validate(garch_spec(0.1, 0.5, 0.1, -0.2, 6)).empty());   // gamma < -alpha
  CHECK(!param_validate(garch_spec(0.1, 0.5, 0.1, 0.1, 2.0)).empty());  // dof
  CHECK(!param_validate(tv_ar_spec(0.0, 0.5, 0.1, 0.0, 6)).empty());    // sigma
  CHECK(!param_validate(location_spec(0.0, 1.0, 0.1, 1.0, 6)).empty()); // |beta|
  CHECK(!param_validate(garch_spec(std::nan(""), 0.5, 0.1, 0.1, 6)).empty());
  CHECK(param_validate(tv_ar_spec(0.0, -0.5, 0.1, 1.0, 6)).empty());
}

TEST_CASE("filter_step closed-form cases") {
  // affine recursion: omega + beta f
  double w0[] = {0.7};
  CHECK(filter_step(1.0, std::span<const double>(w0, 1), garch_spec(0.2, 0.5, 0.0, 0.0, 6)) ==
        doctest::Approx(0.7).epsilon(1e-15));

  // hand evaluation of the garch news term
  double w1[] = {1.0};
  CHECK(filter_step(0.2, std::span<const double>(w1, 1), garch_spec(0.1, 0.5, 0.1, 0.0, 5)) ==
        doctest::Approx(0.275).epsilon(1e-15));

  // location affine case
  double w2[] = {2.5};
  CHECK(filter_step(0.3, std::span<const double>(w2, 1), location_spec(0.1, 0.5, 0.0, 1.0, 6)) ==
        doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("filter_step rejects non-finite input") {
  double w[] = {1.0};
  auto spec = garch_spec(0.1, 0.5, 0.1, 0.0, 5);
  CHECK_THROWS_AS(filter_step(std::numeric_limits<double>::quiet_NaN(),
                              std::span<const double>(w, 1), spec),
                  std::domain_error);
  double wbad[] = {std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(filter_step(0.5, std::span<const double>(wbad, 1), spec), std::domain_error);
}

TEST_CASE("filter_step maps the domain into itself") {
  fixtures::Draw d(2024);
  for (int i = 0; i < 2000; ++i) {
    for (ModelKind kind : {ModelKind::beta_t_garch, ModelKind::t_location}) {
      ModelSpec spec = d.spec(kind);
      double f = d.interior_f(spec);
      auto w = d.window(spec);
      double next = filter_step(f, w, spec);
      FilterDomain dom = filter_domain(spec);
      CHECK(next >= dom.lower - 1e-12 * std::max(1.0, std::fabs(dom.lower)));
      CHECK(next <= dom.upper + 1e-12 * std::max(1.0, std::fabs(dom.upper)));
    }
  }
}

TEST_CASE("filter_step_deriv equals beta when the score gain is off") {
  double wg[] = {1.7};
  CHECK(filter_step_deriv(1.0, std::span<const double>(wg, 1),
                          garch_spec(0.2, 0.37, 0.0, 0.0, 6)) == 0.37);
  double wa[] = {0.4, -1.0};
  CHECK(filter_step_deriv(0.1, std::span<const double>(wa, 2),
                          tv_ar_spec(0.0, 0.81, 0.0, 1.0, 5)) == 0.81);
  double wl[] = {0.3};
  CHECK(filter_step_deriv(0.0, std::span<const double>(wl, 1),
                          location_spec(0.0, -0.4, 0.0, 1.0, 5)) == -0.4);
}

TEST_CASE("filter_step_deriv hand cases") {
  double w[] = {1.0};
  CHECK(filter_step_deriv(0.2, std::span<const double>(w, 1),
                          garch_spec(0.1, 0.5, 0.1, 0.0, 5)) ==
        doctest::Approx(0.734375).epsilon(1e-15));

  // tv_ar at u = 0: kernel value is -1, so derivative is beta - alpha y^2
  double wa[] = {2.0, 1.0};  // y_{t-1} = 2, y_t = 1, f = y_t / y_{t-1}
  CHECK(filter_step_deriv(0.5, std::span<const double>(wa, 2),
                          tv_ar_spec(0.0, 0.9, 0.05, 1.0, 6)) ==
        doctest::Approx(0.9 - 0.05 * 4.0).epsilon(1e-12));
}

TEST_CASE("filter_step_deriv matches central finite differences (1000 draws per model)") {
  fixtures::Draw d(42);
  for (ModelKind kind : kAllKinds) {
    for (int i = 0; i < 1000; ++i) {
      ModelSpec spec = d.spec(kind);
      auto w = d.window(spec);
      double f = d.interior_f(spec);
      double h = 1e-6 * std::max(1.0, std::fabs(f));
      // keep the stencil inside the domain
      FilterDomain dom = filter_domain(spec);
      if (f - h < dom.lower || f + h > dom.upper) continue;
      double analytic = filter_step_deriv(f, w, spec);
      double fd = oracle::central_diff([&](double x) { return filter_step(x, w, spec); }, f, h);
      CHECK(oracle::rel_err(fd, analytic) < 1e-6);
    }
  }
}

namespace {

/// Numerical supremum of |d phi/d f| over the (possibly truncated) domain.
double lipschitz_oracle(const ModelSpec& spec, std::span<const double> w) {
  FilterDomain dom = filter_domain(spec);
  double lo = std::isfinite(dom.lower) ? dom.lower : -50.0;
  double hi = std::isfinite(dom.upper) ? dom.upper : 50.0;
  if (std::isfinite(dom.lower) && !std::isfinite(dom.upper)) hi = dom.lower + 50.0;
  return oracle::grid_refine_max(
      [&](double f) { return std::fabs(filter_step_deriv(f, w, spec)); }, lo, hi);
}

}  // namespace

TEST_CASE("lipschitz_coeff closed-form cases") {
  auto b_only = garch_spec(0.2, 0.37, 0.0, 0.0, 6);
  for (double y : {-3.0, 0.0, 5.0}) {
    double w[] = {y};
    CHECK(lipschitz_coeff(std::span<const double>(w, 1), b_only) == 0.37);
  }

  double w1[] = {1.0};
  CHECK(lipschitz_coeff(std::span<const double>(w1, 1), garch_spec(0.1, 0.5, 0.1, 0.0, 5)) ==
        doctest::Approx(0.734375).epsilon(1e-15));

  double wa[] = {2.0, 0.3};
  CHECK(lipschitz_coeff(std::span<const double>(wa, 2), tv_ar_spec(0.0, 0.9, 0.05, 1.0, 6)) ==
        doctest::Approx(0.925).epsilon(1e-15));

  // zero lagged observation degenerates to |beta|
  double w0[] = {0.0, 1.3};
  CHECK(lipschitz_coeff(std::span<const double>(w0, 2), tv_ar_spec(0.0, -0.6, 0.3, 1.0, 6)) ==
        doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("lipschitz_coeff dominates the derivative and matches the grid supremum") {
  fixtures::Draw d(321);
  for (ModelKind kind : kAllKinds) {
    int done = 0;
    while (done < 300) {
      ModelSpec spec = d.spec(kind);
      auto w = d.window(spec);
      if (kind == ModelKind::tv_ar) {
        // keep the interior maximizers inside the truncated oracle range and
        // wide enough for the 512-point grid to bracket them
        const auto& p = spec.tv_ar();
        if (p.v * p.sigma * p.sigma < 0.25) continue;
        w[0] = (w[0] < 0 ? -1.0 : 1.0) * d.uniform(0.4, 2.5);
        w[1] = d.uniform(-2.5, 2.5);
        double vs = std::sqrt(3.0 * p.v) * p.sigma;
        if ((std::fabs(w[1]) + vs) / std::fabs(w[0]) > 45.0) continue;
      }
      double lam = lipschitz_coeff(w, spec);

      FilterDomain dom = filter_domain(spec);
      double lo = std::isfinite(dom.lower) ? dom.lower : -50.0;
      double hi = std::isfinite(dom.upper) ? dom.upper
                  : std::isfinite(dom.lower) ? dom.lower + 50.0
                                             : 50.0;
      for (int g = 0; g < 512; ++g) {
        double f = lo + (hi - lo) * g / 511.0;
        CHECK(lam >= std::fabs(filter_step_deriv(f, w, spec)) - 1e-9);
      }
      CHECK(std::fabs(lam - lipschitz_oracle(spec, w)) < 1e-6);
      ++done;
    }
  }
}

TEST_CASE("location bound constants") {
  TLocationParams p{0.0, 0.5, 0.8, 1.3, 7.0};
  double root = std::sqrt(p.v) * p.sigma;
  CHECK(location_correction_bound(p) == doctest::Approx(0.8 * root / 2.0));
  CHECK(location_correction_bound(p, LocationBoundKind::legacy) ==
        doctest::Approx(0.8 * std::sqrt(3.0) * root / 4.0));
  // the legacy constant is smaller, so its interval is strictly inside
  CHECK(location_correction_bound(p, LocationBoundKind::legacy) <
        location_correction_bound(p));

  // the correction term never exceeds the analytic bound
  fixtures::Draw d(99);
  for (int i = 0; i < 2000; ++i) {
    double u = d.uniform(-60.0, 60.0);
    double vs2 = p.v * p.sigma * p.sigma;
    double corr = std::fabs(p.alpha * u / (1.0 + u * u / vs2));
    CHECK(corr <= location_correction_bound(p) + 1e-12);
  }
}

TEST_CASE("location_sup_bound dominates every per-observation coefficient") {
  fixtures::Draw d(11);
  for (int i = 0; i < 1000; ++i) {
    ModelSpec spec = d.location();
    double bound = location_sup_bound(spec.location());
    for (int j = 0; j < 10; ++j) {
      double w[] = {d.normal(3.0)};
      CHECK(lipschitz_coeff(std::span<const double>(w, 1), spec) <= bound + 1e-12);
    }
  }
}

TEST_CASE("log_density garch reference value") {
  // y = 0, f = 1, v = 4: log of Gamma(2.5) / (sqrt(2 pi) Gamma(2))
  // = log 0.75 - 0.5 log 2, by Gamma(2.5) = 0.75 sqrt(pi).
  double expect = std::log(0.75) - 0.5 * std::log(2.0);
  CHECK(log_density(0.0, 1.0, garch_spec(0.1, 0.5, 0.1, 0.0, 4.0)) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("log_density integrates to one") {
  auto integrate = [](const ModelSpec& spec, double f, double lo, double hi) {
    double w2 = 0.0;
    bool lagged = spec.kind() == ModelKind::tv_ar;
    if (lagged) w2 = 0.7;  // conditioning value of y_{t-1}
    return oracle::simpson(
        [&](double y) {
          if (lagged) {
            double w[] = {w2, y};
            return std::exp(log_density(std::span<const double>(w, 2), f, spec));
          }
          return std::exp(log_density(y, f, spec));
        },
        lo, hi, 200000);
  };

  for (double v : {4.0, 6.0, 12.0}) {
    double f = 0.7;
    double r = 50.0 * std::sqrt(f);
    CHECK(std::fabs(integrate(garch_spec(0.1, 0.5, 0.1, 0.0, v), f, -r, r) - 1.0) < 1e-6);
  }
  CHECK(std::fabs(integrate(location_spec(0.0, 0.5, 0.3, 1.3, 5.0), 0.4, 0.4 - 130, 0.4 + 130) -
                  1.0) < 1e-6);
  {
    ModelSpec ar = tv_ar_spec(0.0, 0.5, 0.1, 0.8, 5.0);
    double mean = 0.25 * 0.7;  // f * y_{t-1}
    CHECK(std::fabs(integrate(ar, 0.25, mean - 80, mean + 80) - 1.0) < 1e-6);
  }
}

TEST_CASE("log_density peaks at the conditional center") {
  // garch: maximum over y at y = 0
  {
    ModelSpec spec = garch_spec(0.1, 0.6, 0.2, 0.1, 5.0);
    double peak = log_density(0.0, 0.9, spec);
    for (int g = 1; g <= 100; ++g) {
      double y = 4.0 * g / 100.0;
      CHECK(peak >= log_density(y, 0.9, spec));
      CHECK(peak >= log_density(-y, 0.9, spec));
    }
  }
  // location: maximum at y = f, value -log sigma + t(0)
  {
    ModelSpec spec = location_spec(0.0, 0.5, 0.3, 1.7, 6.0);
    double f = 0.8;
    double peak = log_density(f, f, spec);
    CHECK(peak == doctest::Approx(student_t_logpdf(0.0, 6.0) - std::log(1.7)).epsilon(1e-14));
    for (int g = 1; g <= 100; ++g) {
      double dy = 6.0 * g / 100.0;
      CHECK(peak >= log_density(f + dy, f, spec));
      CHECK(peak >= log_density(f - dy, f, spec));
    }
  }
  // tv_ar: maximum at y_t = f y_{t-1}
  {
    ModelSpec spec = tv_ar_spec(0.0, 0.5, 0.1, 1.1, 7.0);
    double f = 0.6, ylag = 1.4;
    double center = f * ylag;
    double wpeak[] = {ylag, center};
    double peak = log_density(std::span<const double>(wpeak, 2), f, spec);
    for (int g = 1; g <= 100; ++g) {
      double dy = 5.0 * g / 100.0;
      double wp[] = {ylag, center + dy}, wm[] = {ylag, center - dy};
      CHECK(peak >= log_density(std::span<const double>(wp, 2), f, spec));
      CHECK(peak >= log_density(std::span<const double>(wm, 2), f, spec));
    }
  }
}

TEST_CASE("log_density domain errors") {
  CHECK_THROWS_AS(log_density(0.0, -1.0, garch_spec(0.1, 0.5, 0.1, 0.0, 5)), std::domain_error);
  CHECK_THROWS_AS(log_density(0.0, 0.0, garch_spec(0.1, 0.5, 0.1, 0.0, 5)), std::domain_error);
}

TEST_CASE("param transforms round-trip on a fitted parameter row") {
  ModelSpec sp = garch_spec(0.020, 0.759, 0.023, 0.309, 8.893);
  auto x = param_transform(sp);
  auto back = param_values(param_untransform(x, ModelKind::beta_t_garch));
  auto orig = param_values(sp);
  for (int i = 0; i < 5; ++i) CHECK(std::fabs(back[i] - orig[i]) < 1e-12);
}

TEST_CASE("param transforms round-trip on random interior points") {
  fixtures::Draw d(777);
  for (ModelKind kind : kAllKinds) {
    for (int i = 0; i < 500; ++i) {
      ModelSpec spec = d.spec(kind);
      auto orig = param_values(spec);
      auto back = param_values(param_untransform(param_transform(spec), kind));
      for (int j = 0; j < 5; ++j)
        CHECK(std::fabs(back[j] - orig[j]) <= 1e-12 * std::max(1.0, std::fabs(orig[j])));
    }
  }
}

TEST_CASE("param_untransform always lands in the admissible set") {
  fixtures::Draw d(31337);
  for (ModelKind kind : kAllKinds) {
    for (int i = 0; i < 10000; ++i) {
      std::vector<double> x(5);
      for (double& xi : x) xi = d.uniform(-40.0, 40.0);
      if (i % 7 == 0) x[static_cast<std::size_t>(d.uniform(0, 4.999))] = d.uniform(-2000, 2000);
      CHECK(param_ok(param_untransform(x, kind)));
    }
  }
}

TEST_CASE("transform of boundary-adjacent points stays finite") {
  auto x = param_transform(garch_spec(1e-7, 0.999998, 1e-6, 0.0, 2.001));
  for (double xi : x) CHECK(std::isfinite(xi));
  auto xl = param_transform(location_spec(0.0, 0.999998, 0.0, 1e-6, 1e-6));
  for (double xi : xl) CHECK(std::isfinite(xi));
}

TEST_CASE("filter domains") {
  auto g = garch_spec(0.2, 0.5, 0.1, 0.0, 6);
  CHECK(filter_domain(g).lower == doctest::Approx(0.4));
  CHECK(std::isinf(filter_domain(g).upper));

  auto a = tv_ar_spec(0.0, 0.5, 0.1, 1.0, 6);
  CHECK(std::isinf(filter_domain(a).lower));
  CHECK(std::isinf(filter_domain(a).upper));

  auto l = location_spec(0.3, 0.6, 0.5, 1.0, 4.0);
  FilterDomain dom = filter_domain(l);
  double c = location_correction_bound(l.location());
  CHECK(dom.lower == doctest::Approx((0.3 - c) / 0.4));
  CHECK(dom.upper == doctest::Approx((0.3 + c) / 0.4));
  CHECK(dom.lower < dom.upper);

  // negative-beta location domain is still invariant under the step map
  fixtures::Draw d(5150);
  for (int i = 0; i < 500; ++i) {
    ModelSpec spec = location_spec(d.uniform(-1, 1), d.uniform(-0.9, -0.05),
                                   d.uniform(-1, 1), d.uniform(0.3, 2), d.uniform(1, 10));
    FilterDomain dm = filter_domain(spec);
    double f = d.uniform(dm.lower, dm.upper);
    double w[] = {d.normal(2.0)};
    double next = filter_step(f, std::span<const double>(w, 1), spec);
    CHECK(next >= dm.lower - 1e-10);
    CHECK(next <= dm.upper + 1e-10);
  }
}

TEST_CASE("with_param and param_names round out the lattice plumbing") {
  ModelSpec base = garch_spec(0.1, 0.5, 0.1, 0.1, 6);
  ModelSpec moved = with_param(base, "beta", 0.77);
  CHECK(moved.garch().beta == 0.77);
  CHECK(moved.garch().omega == 0.1);
  CHECK_THROWS_AS(with_param(base, "sigma", 1.0), ConfigError);
  CHECK(param_names(ModelKind::beta_t_garch)[3] == "gamma");
  CHECK(param_names(ModelKind::tv_ar)[3] == "sigma");
}
