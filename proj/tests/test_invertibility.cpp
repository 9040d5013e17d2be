#include <doctest.h>

#include <cmath>
#include <vector>

#include "odml/invertibility.hpp"
#include "odml/region.hpp"
#include "odml/simulate.hpp"
#include "fixtures.hpp"

using namespace odml;

TEST_CASE("empirical_lyapunov is log beta when the gain is off") {
  ModelSpec spec = garch_spec(0.2, 0.5, 0.0, 0.0, 6);
  SimOutput sim = simulate(garch_spec(0.1, 0.7, 0.1, 0.1, 6), 400, 3);
  CHECK(empirical_lyapunov(sim.series, spec) ==
        doctest::Approx(std::log(0.5)).epsilon(1e-14));
}

TEST_CASE("empirical_lyapunov matches a test-local garch summation") {
  ModelSpec spec = garch_spec(0.12, 0.66, 0.21, 0.08, 5.5);
  SimOutput sim = simulate(garch_spec(0.1, 0.7, 0.1, 0.1, 6), 700, 9);
  const auto& p = spec.garch();
  // direct two-pass reimplementation over y_1..y_n (series[1]..series[n])
  std::vector<double> logs;
  double obar = p.omega / (1.0 - p.beta);
  for (std::size_t i = 1; i < sim.series.size(); ++i) {
    double y = sim.series[i];
    double dummy = y <= 0.0 ? 1.0 : 0.0;
    double num = (p.alpha + p.gamma * dummy) * (p.v + 1.0) * y * y * y * y;
    double den = (p.v - 2.0) * obar + y * y;
    logs.push_back(std::log(std::fabs(p.beta + num / (den * den))));
  }
  double sum = 0.0;
  for (double x : logs) sum += x;
  CHECK(empirical_lyapunov(sim.series, spec) ==
        doctest::Approx(sum / static_cast<double>(logs.size())).epsilon(1e-12));
}

TEST_CASE("empirical_lyapunov uses the lagged observation for tv_ar") {
  // n = 1: only Lambda_1 enters, and it depends on y_0 alone
  ModelSpec spec = tv_ar_spec(0.0, 0.8, 0.1, 1.0, 6);
  std::vector<double> series{0.5, 2.0, -1.0};  // y_{-1}, y_0, y_1
  double expect = std::max(std::fabs(0.8 - 0.1 * 4.0), std::fabs(0.8 + 0.1 * 4.0 / 8.0));
  CHECK(empirical_lyapunov(series, spec) == doctest::Approx(std::log(expect)).epsilon(1e-14));
}

TEST_CASE("empirical_lyapunov flags a vanishing coefficient") {
  // beta = 0 and y_t = 0 at some t makes Lambda_t = 0
  ModelSpec spec = garch_spec(0.2, 0.0, 0.3, 0.0, 6);
  std::vector<double> series{0.5, 1.0, 0.0, -0.7};
  auto res = empirical_lyapunov_checked(series, spec);
  CHECK(res.has_zero_coefficient);
  CHECK(std::isinf(res.value));
  CHECK(res.value < 0);
}

TEST_CASE("samplewise bound: the news ratio never exceeds one") {
  fixtures::Draw d(66);
  for (int rep = 0; rep < 300; ++rep) {
    ModelSpec spec = d.garch();
    const auto& p = spec.garch();
    double y = d.normal(2.0);
    double w[] = {y};
    double lam = lipschitz_coeff(std::span<const double>(w, 1), spec);
    double dummy = y <= 0.0 ? 1.0 : 0.0;
    CHECK(std::log(lam) <=
          std::log(std::fabs(p.beta + (p.alpha + p.gamma * dummy) * (p.v + 1.0))) + 1e-12);
  }
}

TEST_CASE("empirical_lyapunov is nondecreasing in alpha for garch") {
  SimOutput sim = simulate(garch_spec(0.1, 0.7, 0.1, 0.1, 6), 500, 21);
  fixtures::Draw d(31);
  for (int rep = 0; rep < 50; ++rep) {
    ModelSpec lo = d.garch();
    auto vals = param_values(lo);
    auto hivals = vals;
    hivals[2] = vals[2] + d.uniform(0.01, 0.5);
    ModelSpec hi = make_spec(ModelKind::beta_t_garch, hivals);
    CHECK(empirical_lyapunov(sim.series, hi) >=
          empirical_lyapunov(sim.series, lo) - 1e-12);
  }
}

TEST_CASE("in_region applies the margin") {
  SimOutput sim = simulate(garch_spec(0.1, 0.7, 0.1, 0.1, 6), 300, 5);
  // gain off: empirical value is log beta exactly
  CHECK(in_region(sim.series, garch_spec(0.1, std::exp(-0.5), 0.0, 0.0, 6), 0.01));
  CHECK(!in_region(sim.series, garch_spec(0.1, std::exp(-0.005), 0.0, 0.0, 6), 0.01));
  CHECK_THROWS_AS(in_region(sim.series, garch_spec(0.1, 0.5, 0.0, 0.0, 6), 0.0),
                  std::invalid_argument);
}

TEST_CASE("feasible_condition_garch closed forms and fitted rows") {
  CHECK(feasible_condition_garch({0.1, 0.62, 0.0, 0.0, 7.0}) ==
        doctest::Approx(std::log(0.62)).epsilon(1e-14));
  // two fitted stock-index rows with their reference condition values
  CHECK(feasible_condition_garch({0.058, 0.554, 0.000, 0.371, 7.417}) ==
        doctest::Approx(0.357).epsilon(0.006));
  CHECK(feasible_condition_garch({0.020, 0.759, 0.023, 0.309, 8.893}) ==
        doctest::Approx(0.691).epsilon(0.003));
  CHECK(std::isinf(feasible_condition_garch({0.1, 0.0, 0.0, 0.5, 6.0})));
}

TEST_CASE("region_grid: zero-gain column has an analytic membership boundary") {
  SimOutput sim = simulate(garch_spec(0.1, 0.7, 0.1, 0.1, 6), 400, 8);
  ModelSpec base = garch_spec(0.1, 0.5, 0.1, 0.0, 6);  // gamma fixed at 0
  AxisSpec ax{"alpha", 0.0, 0.4, 3};
  AxisSpec ay{"beta", 0.90, 0.999, 40};
  double delta = 0.01;
  RegionGrid grid = region_grid(sim.series, base, ax, ay, delta, std::nullopt);
  for (int iy = 0; iy < ay.size; ++iy) {
    const GridCell& cell = grid.at(0, iy);  // alpha = 0 column
    CHECK(cell.status == CellStatus::ok);
    CHECK(cell.lyapunov == doctest::Approx(std::log(cell.y)).epsilon(1e-12));
    CHECK(cell.in_region == (cell.y <= std::exp(-delta)));
  }
}

TEST_CASE("region_grid cells equal direct evaluations") {
  SimOutput sim = simulate(garch_spec(0.1, 0.7, 0.1, 0.1, 6), 300, 44);
  ModelSpec base = garch_spec(0.08, 0.6, 0.15, 0.1, 7);
  AxisSpec ax{"alpha", 0.01, 0.8, 11};
  AxisSpec ay{"v", 2.5, 20.0, 7};
  RegionGrid grid = region_grid(sim.series, base, ax, ay, 0.02, 0.05);
  fixtures::Draw d(77);
  for (int rep = 0; rep < 20; ++rep) {
    int ix = static_cast<int>(d.uniform(0, ax.size - 1e-9));
    int iy = static_cast<int>(d.uniform(0, ay.size - 1e-9));
    const GridCell& cell = grid.at(ix, iy);
    ModelSpec spec = with_param(with_param(base, "alpha", ax.value(ix)), "v", ay.value(iy));
    CHECK(cell.lyapunov == empirical_lyapunov(sim.series, spec));
    CHECK(cell.feasible == feasible_condition_garch(spec.garch()));
    CHECK(cell.in_region == in_region(sim.series, spec, 0.02));
    ConfidenceMembership m = confidence_membership(sim.series, spec, 0.05);
    CHECK(cell.in_up == m.in_up);
    CHECK(cell.in_lo == m.in_lo);
  }
}

TEST_CASE("region_grid marks inadmissible and degenerate cells") {
  SimOutput sim = simulate(garch_spec(0.1, 0.7, 0.1, 0.1, 6), 300, 45);
  ModelSpec base = garch_spec(0.1, 0.5, 0.1, 0.0, 6);
  AxisSpec ax{"alpha", 0.0, 0.2, 2};     // includes the degenerate alpha = 0
  AxisSpec ay{"beta", 0.5, 1.1, 4};      // includes inadmissible beta >= 1
  RegionGrid grid = region_grid(sim.series, base, ax, ay, 0.01, 0.05);
  int n_inadmissible = 0, n_degenerate = 0;
  for (const auto& cell : grid.cells) {
    if (cell.status == CellStatus::inadmissible) {
      ++n_inadmissible;
      CHECK(std::isnan(cell.lyapunov));
      CHECK(!cell.in_region);
    }
    if (cell.status == CellStatus::degenerate) {
      ++n_degenerate;
      // sign convention: contraction side belongs to both confidence sets
      CHECK(cell.in_up == (cell.lyapunov < 0.0));
      CHECK(cell.in_lo == (cell.lyapunov < 0.0));
    }
  }
  CHECK(n_inadmissible == 2);  // the beta = 1.1 row
  CHECK(n_degenerate == 3);    // alpha = 0 cells with admissible beta
}

TEST_CASE("region_grid argument validation") {
  SimOutput sim = simulate(garch_spec(0.1, 0.7, 0.1, 0.1, 6), 100, 1);
  ModelSpec base = garch_spec(0.1, 0.5, 0.1, 0.0, 6);
  CHECK_THROWS_AS(region_grid(sim.series, base, {"alpha", 0, 1, 5}, {"alpha", 0, 1, 5}, 0.01),
                  std::invalid_argument);
  CHECK_THROWS_AS(region_grid(sim.series, base, {"alpha", 0, 1, 5}, {"beta", 0, 1, 5}, -1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(region_grid(sim.series, base, {"alpha", 1, 0, 5}, {"beta", 0, 1, 5}, 0.01),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      region_grid(sim.series, base, {"alpha", 0, 1, 5}, {"beta", 0, 1, 5}, 0.01, 0.9),
      std::invalid_argument);
}

TEST_CASE("confidence sets nest around the estimated region") {
  // With a margin small against the sampling noise of the empirical mean,
  // the lower confidence set sits inside the region and the region inside
  // the upper set, on every admissible non-degenerate cell.
  ModelSpec dgp = garch_spec(0.1, 0.7, 0.1, 0.1, 6);
  ModelSpec base = garch_spec(0.1, 0.5, 0.2, 0.1, 6);
  AxisSpec ax{"alpha", 0.05, 0.6, 12};
  AxisSpec ay{"beta", 0.05, 0.95, 12};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SimOutput sim = simulate(dgp, 4000, seed);
    RegionGrid grid = region_grid(sim.series, base, ax, ay, 0.001, 0.05);
    for (const auto& cell : grid.cells) {
      if (cell.status != CellStatus::ok) continue;
      if (cell.in_lo) CHECK(cell.in_region);
      if (cell.in_region) CHECK(cell.in_up);
    }
  }
}
