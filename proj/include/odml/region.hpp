#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "odml/inference.hpp"
#include "odml/invertibility.hpp"

namespace odml {

/// One grid axis: a strictly increasing lattice over a named parameter.
struct AxisSpec {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  int size = 101;

  double value(int i) const {
    if (size == 1) return lo;
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(size - 1);
  }
};

enum class CellStatus : std::uint8_t {
  ok = 0,
  inadmissible = 1,  // parameter point fails validation
  neg_inf = 2,       // some Lambda_t = 0, empirical value is -inf
  degenerate = 3,    // constant log Lambda_t, T_n undefined (sign convention used)
};

inline std::string to_string(CellStatus s) {
  switch (s) {
    case CellStatus::ok: return "ok";
    case CellStatus::inadmissible: return "inadmissible";
    case CellStatus::neg_inf: return "neg_inf";
    case CellStatus::degenerate: return "degenerate";
  }
  return "?";
}

struct GridCell {
  double x = 0.0;
  double y = 0.0;
  double lyapunov = std::numeric_limits<double>::quiet_NaN();
  double feasible = std::numeric_limits<double>::quiet_NaN();  // garch only
  bool in_region = false;
  bool in_up = false;
  bool in_lo = false;
  CellStatus status = CellStatus::ok;
};

/// A 2-D lattice over two free parameters with per-cell condition values and
/// region/confidence memberships. Cells are stored row-major with the x axis
/// varying fastest.
struct RegionGrid {
  AxisSpec axis_x;
  AxisSpec axis_y;
  ModelSpec base;  // carries the fixed parameters
  double delta = 0.01;
  std::optional<double> alpha;
  std::optional<int> bandwidth;
  int n = 0;  // sample size behind the empirical condition
  std::vector<GridCell> cells;

  const GridCell& at(int ix, int iy) const {
    return cells[static_cast<std::size_t>(iy) * static_cast<std::size_t>(axis_x.size) +
                 static_cast<std::size_t>(ix)];
  }
};

/// Evaluate the empirical Lyapunov condition (and, for garch, the data-free
/// sufficient condition; and, when alpha is given, the confidence-set
/// memberships) over the lattice. Inadmissible points are flagged, not
/// errored. Cells with constant log Lambda_t cannot carry a T_n; their
/// memberships follow the sign of the empirical mean.
inline RegionGrid region_grid(std::span<const double> series, const ModelSpec& base,
                              const AxisSpec& axis_x, const AxisSpec& axis_y, double delta,
                              std::optional<double> alpha = {},
                              std::optional<int> bandwidth = {}) {
  if (!(delta > 0.0)) throw std::invalid_argument("region_grid: delta must be positive");
  if (axis_x.name == axis_y.name)
    throw std::invalid_argument("region_grid: axes must name two distinct parameters");
  if (axis_x.size < 1 || axis_y.size < 1)
    throw std::invalid_argument("region_grid: axis sizes must be >= 1");
  if (!(axis_x.lo < axis_x.hi) && axis_x.size > 1)
    throw std::invalid_argument("region_grid: x lattice must be strictly increasing");
  if (!(axis_y.lo < axis_y.hi) && axis_y.size > 1)
    throw std::invalid_argument("region_grid: y lattice must be strictly increasing");
  if (alpha && !(*alpha > 0.0 && *alpha <= 0.5))
    throw std::invalid_argument("region_grid: alpha must lie in (0, 0.5]");

  RegionGrid grid;
  grid.axis_x = axis_x;
  grid.axis_y = axis_y;
  grid.base = base;
  grid.delta = delta;
  grid.alpha = alpha;
  grid.bandwidth = bandwidth;
  grid.n = static_cast<int>(series.size()) - base.lag_order() - 1;
  grid.cells.resize(static_cast<std::size_t>(axis_x.size) * static_cast<std::size_t>(axis_y.size));

  const double z_up = alpha ? normal_quantile(1.0 - *alpha) : 0.0;
  const double z_lo = alpha ? normal_quantile(*alpha) : 0.0;

  for (int iy = 0; iy < axis_y.size; ++iy) {
    for (int ix = 0; ix < axis_x.size; ++ix) {
      GridCell cell;
      cell.x = axis_x.value(ix);
      cell.y = axis_y.value(iy);

      ModelSpec spec = with_param(with_param(base, axis_x.name, cell.x), axis_y.name, cell.y);
      if (!param_ok(spec)) {
        cell.status = CellStatus::inadmissible;
      } else {
        if (spec.kind() == ModelKind::beta_t_garch)
          cell.feasible = feasible_condition_garch(spec.garch());

        auto logs = log_lambda_series(series, spec);
        double sum = 0.0;
        bool zero = false;
        for (double v : logs) {
          if (std::isinf(v) && v < 0.0) zero = true;
          sum += v;
        }
        if (zero) {
          cell.status = CellStatus::neg_inf;
          cell.lyapunov = -std::numeric_limits<double>::infinity();
        } else {
          cell.lyapunov = sum / static_cast<double>(logs.size());
          cell.in_region = cell.lyapunov <= -delta;
          if (alpha) {
            int m = bandwidth.value_or(default_bandwidth(static_cast<int>(logs.size())));
            double s2 = newey_west_variance(logs, m);
            if (s2 < kDegenerateVarianceThreshold) {
              cell.status = CellStatus::degenerate;
              cell.in_up = cell.lyapunov < 0.0;
              cell.in_lo = cell.lyapunov < 0.0;
            } else {
              double t = std::sqrt(static_cast<double>(logs.size())) * cell.lyapunov /
                         std::sqrt(s2);
              cell.in_up = t < z_up;
              cell.in_lo = t < z_lo;
            }
          }
        }
      }
      grid.cells[static_cast<std::size_t>(iy) * static_cast<std::size_t>(axis_x.size) +
                 static_cast<std::size_t>(ix)] = cell;
    }
  }
  return grid;
}

}  // namespace odml
