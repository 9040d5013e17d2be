#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "odml/errors.hpp"
#include "odml/estimate.hpp"
#include "odml/inference.hpp"
#include "odml/region.hpp"
#include "odml/simulate.hpp"

namespace odml {

enum class Transform { none, log_return, log_return_x100 };

inline std::string to_string(Transform t) {
  switch (t) {
    case Transform::none: return "none";
    case Transform::log_return: return "log_return";
    case Transform::log_return_x100: return "log_return_x100";
  }
  return "?";
}

inline Transform transform_from_string(const std::string& s) {
  if (s == "none") return Transform::none;
  if (s == "log_return") return Transform::log_return;
  if (s == "log_return_x100") return Transform::log_return_x100;
  throw ConfigError("unknown transform: '" + s + "'");
}

/// One ingested observation column, chronological order.
struct Dataset {
  std::string name;
  std::vector<double> observations;
  Transform transform = Transform::none;
  std::string source_path;
};

/// Fixed 17-significant-digit float formatting used by every emitted file, so
/// identical runs produce byte-identical output.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    std::size_t a = s.find_first_not_of(" \t");
    std::size_t b = s.find_last_not_of(" \t");
    s = a == std::string::npos ? "" : s.substr(a, b - a + 1);
  }
  return out;
}

inline std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

/// Parse one numeric column from a CSV file. `column` is either a header name
/// or a 0-based index; a header row is auto-detected. The log-return
/// transforms map prices p_t to log p_t - log p_{t-1} (optionally x100).
inline Dataset ingest_csv(const std::string& path, const std::string& column,
                          Transform transform) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file: " + path);

  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    rows.push_back(detail::split_csv_line(line));
  }
  if (rows.empty()) throw DataError("empty data file: " + path);

  // Resolve the column: by header name if the first row has it, else index.
  std::size_t col = 0;
  bool has_header = false;
  bool resolved = false;
  for (std::size_t j = 0; j < rows[0].size(); ++j) {
    if (rows[0][j] == column) {
      col = j;
      has_header = true;
      resolved = true;
      break;
    }
  }
  if (!resolved) {
    auto idx = detail::parse_double(column);
    if (idx && *idx >= 0 && *idx == std::floor(*idx)) {
      col = static_cast<std::size_t>(*idx);
      resolved = true;
      // Header row detection: first cell of the column not numeric.
      has_header = col < rows[0].size() && !detail::parse_double(rows[0][col]).has_value();
    }
  }
  if (!resolved)
    throw DataError("column '" + column + "' not found in " + path);

  std::vector<double> raw;
  for (std::size_t i = has_header ? 1 : 0; i < rows.size(); ++i) {
    if (col >= rows[i].size())
      throw DataError("row " + std::to_string(i + 1) + " has no column " + std::to_string(col));
    auto v = detail::parse_double(rows[i][col]);
    if (!v)
      throw DataError("non-numeric cell at row " + std::to_string(i + 1) + " column '" +
                      column + "': '" + rows[i][col] + "'");
    if (!std::isfinite(*v))
      throw DataError("non-finite value at row " + std::to_string(i + 1));
    raw.push_back(*v);
  }
  if (raw.empty()) throw DataError("no data rows in " + path);

  Dataset ds;
  ds.name = path;
  ds.transform = transform;
  ds.source_path = path;
  if (transform == Transform::none) {
    ds.observations = std::move(raw);
  } else {
    if (raw.size() < 2) throw DataError("return transform needs at least 2 rows");
    double scale = transform == Transform::log_return_x100 ? 100.0 : 1.0;
    ds.observations.reserve(raw.size() - 1);
    for (std::size_t i = 1; i < raw.size(); ++i) {
      if (!(raw[i] > 0.0 && raw[i - 1] > 0.0))
        throw DataError("log-return transform requires positive prices (row " +
                        std::to_string(i + 1) + ")");
      ds.observations.push_back(scale * (std::log(raw[i]) - std::log(raw[i - 1])));
    }
  }
  for (double v : ds.observations)
    if (!std::isfinite(v)) throw DataError("non-finite observation after transform");
  return ds;
}

inline void write_series_csv(const std::string& path, std::span<const double> values,
                             const std::string& header = "y") {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << header << "\n";
  for (double v : values) out << format_double(v) << "\n";
}

// ---------------------------------------------------------------------------
// JSON envelopes.
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const ModelSpec& spec) {
  nlohmann::json j;
  j["model"] = to_string(spec.kind());
  const auto& names = param_names(spec.kind());
  auto vals = param_values(spec);
  for (std::size_t i = 0; i < names.size(); ++i) j["params"][names[i]] = vals[i];
  return j;
}

inline ModelSpec model_spec_from_json(const nlohmann::json& j) {
  ModelKind kind = model_kind_from_string(j.at("model").get<std::string>());
  const auto& names = param_names(kind);
  std::vector<double> vals(5);
  for (std::size_t i = 0; i < names.size(); ++i)
    vals[i] = j.at("params").at(names[i]).get<double>();
  return make_spec(kind, vals);
}

inline nlohmann::json to_json(const TestResult& r) {
  return nlohmann::json{{"t_stat", r.t_stat},       {"sigma2_hat", r.sigma2_hat},
                        {"bandwidth", r.bandwidth}, {"p_two_sided", r.p_two_sided},
                        {"p_left", r.p_left},       {"p_right", r.p_right},
                        {"n", r.n}};
}

inline nlohmann::json to_json(const EstimationResult& r) {
  nlohmann::json j;
  j["theta_hat"] = to_json(r.theta_hat);
  j["loglik"] = r.loglik;
  j["lyapunov_at_hat"] = r.lyapunov_at_hat;
  j["constrained"] = r.constrained;
  if (r.constrained) j["delta"] = r.delta;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["restarts_used"] = r.restarts_used;
  j["f0_used"] = r.f0_used;
  j["status"] = r.status;
  if (r.std_errors) {
    const auto& names = param_names(r.theta_hat.kind());
    for (std::size_t i = 0; i < names.size(); ++i) {
      double se = (*r.std_errors)[i];
      if (std::isnan(se))
        j["std_errors"][names[i]] = nullptr;
      else
        j["std_errors"][names[i]] = se;
    }
  } else {
    j["std_errors"] = nullptr;
    j["hessian_failed"] = r.hessian_failed;
  }
  return j;
}

/// Grid CSV, one row per cell: x, y, lyapunov, feasible, in_region, in_up, in_lo.
inline void write_region_csv(const std::string& path, const RegionGrid& grid) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << grid.axis_x.name << "," << grid.axis_y.name
      << ",lyapunov,feasible,in_region,in_up,in_lo,status\n";
  for (const auto& c : grid.cells) {
    out << format_double(c.x) << "," << format_double(c.y) << ","
        << format_double(c.lyapunov) << "," << format_double(c.feasible) << ","
        << (c.in_region ? 1 : 0) << "," << (c.in_up ? 1 : 0) << "," << (c.in_lo ? 1 : 0)
        << "," << to_string(c.status) << "\n";
  }
}

inline nlohmann::json to_json(const RegionGrid& grid) {
  nlohmann::json j;
  j["axis_x"] = {{"name", grid.axis_x.name},
                 {"lo", grid.axis_x.lo},
                 {"hi", grid.axis_x.hi},
                 {"size", grid.axis_x.size}};
  j["axis_y"] = {{"name", grid.axis_y.name},
                 {"lo", grid.axis_y.lo},
                 {"hi", grid.axis_y.hi},
                 {"size", grid.axis_y.size}};
  j["fixed"] = to_json(grid.base);
  j["delta"] = grid.delta;
  if (grid.alpha) j["alpha"] = *grid.alpha;
  if (grid.bandwidth) j["bandwidth"] = *grid.bandwidth;
  j["n"] = grid.n;
  j["cells"] = grid.cells.size();
  return j;
}

}  // namespace odml
