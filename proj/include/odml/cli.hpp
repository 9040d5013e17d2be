#pragma once

#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "odml/io.hpp"

namespace odml {

/// Validated configuration shared by all CLI commands. Values come from a
/// JSON config document; command-line flags override individual fields.
struct RunConfig {
  std::optional<ModelKind> model;
  std::optional<ModelSpec> params;

  std::optional<std::string> data;
  std::string column = "y";
  Transform transform = Transform::none;

  double delta = 0.01;
  std::optional<double> alpha = 0.05;
  std::optional<int> bandwidth;
  std::uint64_t seed = 1;
  int n_starts = 8;
  bool constrained = false;
  std::optional<double> f0;
  bool std_errors = true;
  std::string out = "odml_out";

  // simulate
  std::optional<int> sim_n;
  int burn_in = 1000;

  // region
  std::optional<AxisSpec> axis_x, axis_y;

  // diverge
  std::optional<double> f0_a, f0_b;

  // report
  struct ReportEntry {
    std::string name;
    std::string data;
    std::string column = "y";
    Transform transform = Transform::none;
  };
  std::vector<ReportEntry> report_datasets;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

inline AxisSpec parse_axis(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  reject_unknown_keys(j, {"name", "lo", "hi", "size"}, where);
  AxisSpec axis;
  try {
    axis.name = j.at("name").get<std::string>();
    axis.lo = j.at("lo").get<double>();
    axis.hi = j.at("hi").get<double>();
    axis.size = j.value("size", 101);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  if (axis.size < 1) throw ConfigError(where + ".size must be >= 1");
  return axis;
}

inline ModelSpec parse_params(const nlohmann::json& j, ModelKind kind) {
  if (!j.is_object()) throw ConfigError("'params' must be an object");
  const auto& names = param_names(kind);
  reject_unknown_keys(j, std::set<std::string>(names.begin(), names.end()), "params");
  std::vector<double> vals(5);
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!j.contains(names[i])) throw ConfigError("params." + names[i] + " is missing");
    try {
      vals[i] = j.at(names[i]).get<double>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("params." + names[i] + " must be a number");
    }
  }
  return make_spec(kind, vals);
}

}  // namespace detail

/// Parse and validate a JSON config document. Unknown keys are rejected with
/// their field path.
inline RunConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config root must be an object");
  detail::reject_unknown_keys(
      j,
      {"model", "params", "data", "column", "transform", "delta", "alpha", "bandwidth",
       "seed", "n_starts", "constrained", "f0", "std_errors", "out", "simulate", "grid",
       "diverge", "report"},
      "config");

  RunConfig cfg;
  try {
    if (j.contains("model")) cfg.model = model_kind_from_string(j.at("model").get<std::string>());
    if (j.contains("data")) cfg.data = j.at("data").get<std::string>();
    if (j.contains("column")) cfg.column = j.at("column").get<std::string>();
    if (j.contains("transform"))
      cfg.transform = transform_from_string(j.at("transform").get<std::string>());
    if (j.contains("delta")) cfg.delta = j.at("delta").get<double>();
    if (j.contains("alpha")) {
      if (j.at("alpha").is_null())
        cfg.alpha.reset();
      else
        cfg.alpha = j.at("alpha").get<double>();
    }
    if (j.contains("bandwidth") && !j.at("bandwidth").is_null())
      cfg.bandwidth = j.at("bandwidth").get<int>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("n_starts")) cfg.n_starts = j.at("n_starts").get<int>();
    if (j.contains("constrained")) cfg.constrained = j.at("constrained").get<bool>();
    if (j.contains("f0") && !j.at("f0").is_null()) cfg.f0 = j.at("f0").get<double>();
    if (j.contains("std_errors")) cfg.std_errors = j.at("std_errors").get<bool>();
    if (j.contains("out")) cfg.out = j.at("out").get<std::string>();

    if (j.contains("simulate")) {
      const auto& s = j.at("simulate");
      detail::reject_unknown_keys(s, {"n", "burn_in"}, "simulate");
      if (s.contains("n")) cfg.sim_n = s.at("n").get<int>();
      if (s.contains("burn_in")) cfg.burn_in = s.at("burn_in").get<int>();
    }
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      detail::reject_unknown_keys(g, {"x", "y"}, "grid");
      if (g.contains("x")) cfg.axis_x = detail::parse_axis(g.at("x"), "grid.x");
      if (g.contains("y")) cfg.axis_y = detail::parse_axis(g.at("y"), "grid.y");
    }
    if (j.contains("diverge")) {
      const auto& d = j.at("diverge");
      detail::reject_unknown_keys(d, {"f0_a", "f0_b"}, "diverge");
      if (d.contains("f0_a")) cfg.f0_a = d.at("f0_a").get<double>();
      if (d.contains("f0_b")) cfg.f0_b = d.at("f0_b").get<double>();
    }
    if (j.contains("report")) {
      const auto& r = j.at("report");
      detail::reject_unknown_keys(r, {"datasets"}, "report");
      for (const auto& e : r.at("datasets")) {
        detail::reject_unknown_keys(e, {"name", "data", "column", "transform"},
                                    "report.datasets[]");
        RunConfig::ReportEntry entry;
        entry.name = e.value("name", e.at("data").get<std::string>());
        entry.data = e.at("data").get<std::string>();
        entry.column = e.value("column", "y");
        entry.transform = transform_from_string(e.value("transform", "none"));
        cfg.report_datasets.push_back(entry);
      }
    }

    if (j.contains("params")) {
      if (!cfg.model) throw ConfigError("'params' requires 'model'");
      cfg.params = detail::parse_params(j.at("params"), *cfg.model);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  if (cfg.n_starts < 1) throw ConfigError("n_starts must be >= 1");
  if (!(cfg.delta > 0.0)) throw ConfigError("delta must be positive");
  if (cfg.alpha && !(*cfg.alpha > 0.0 && *cfg.alpha <= 0.5))
    throw ConfigError("alpha must lie in (0, 0.5]");
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse failure in " + path + ": " + e.what());
  }
  return parse_config(j);
}

namespace detail {

inline ModelKind require_model(const RunConfig& cfg) {
  if (!cfg.model) throw ConfigError("a model is required (--model or config 'model')");
  return *cfg.model;
}

inline ModelSpec require_params(const RunConfig& cfg) {
  if (!cfg.params) throw ConfigError("parameter values are required (config 'params')");
  auto violations = param_validate(*cfg.params);
  if (!violations.empty()) throw ConfigError("params: " + violations[0]);
  return *cfg.params;
}

inline Dataset require_data(const RunConfig& cfg) {
  if (!cfg.data) throw ConfigError("an input series is required (--data or config 'data')");
  return ingest_csv(*cfg.data, cfg.column, cfg.transform);
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace detail

/// simulate: draw a sample from the model and write the observation series
/// (pre-sample included) and the true parameter path.
inline int cmd_simulate(const RunConfig& cfg) {
  ModelSpec spec = detail::require_params(cfg);
  if (!cfg.sim_n) throw ConfigError("simulate.n is required");
  SimOutput sim = simulate(spec, *cfg.sim_n, cfg.seed, cfg.burn_in);
  write_series_csv(cfg.out + "_series.csv", sim.series);

  std::ofstream out(cfg.out + "_truepath.csv");
  if (!out) throw DataError("cannot write file: " + cfg.out + "_truepath.csv");
  out << "t,f_true\n";
  for (std::size_t t = 0; t < sim.true_path.size(); ++t)
    out << (t + 1) << "," << format_double(sim.true_path[t]) << "\n";
  std::cout << "wrote " << cfg.out << "_series.csv (" << sim.series.size()
            << " observations) and " << cfg.out << "_truepath.csv\n";
  return 0;
}

/// fit: maximum likelihood, unconstrained or restricted to the estimated
/// invertibility region when --constrained is set.
inline int cmd_fit(const RunConfig& cfg) {
  ModelKind kind = detail::require_model(cfg);
  Dataset ds = detail::require_data(cfg);
  OptimizerOptions opts;
  opts.seed = cfg.seed;

  EstimationResult res;
  if (cfg.params) {
    res = cfg.constrained
              ? fit_ml_constrained(ds.observations, kind, cfg.delta, cfg.params, cfg.f0, opts)
              : fit_ml(ds.observations, kind, cfg.params, cfg.f0, opts);
  } else {
    res = multi_start(ds.observations, kind, cfg.n_starts, cfg.seed, cfg.constrained,
                      cfg.delta, opts);
  }
  if (cfg.std_errors) attach_standard_errors(ds.observations, res);

  nlohmann::json j = to_json(res);
  j["seed"] = cfg.seed;
  j["n_starts"] = cfg.params ? 1 : cfg.n_starts;
  j["data"] = ds.source_path;
  j["transform"] = to_string(ds.transform);
  detail::write_json_file(cfg.out + ".json", j);
  std::cout << "fit " << to_string(kind) << ": loglik " << format_double(res.loglik)
            << ", status " << res.status << ", wrote " << cfg.out << ".json\n";
  return 0;
}

/// region: evaluate the empirical invertibility region (and confidence-set
/// memberships) over a 2-D parameter lattice.
inline int cmd_region(const RunConfig& cfg) {
  ModelSpec base = detail::require_params(cfg);
  Dataset ds = detail::require_data(cfg);
  if (!cfg.axis_x || !cfg.axis_y) throw ConfigError("grid.x and grid.y are required");
  RegionGrid grid = region_grid(ds.observations, base, *cfg.axis_x, *cfg.axis_y, cfg.delta,
                                cfg.alpha, cfg.bandwidth);
  write_region_csv(cfg.out + ".csv", grid);
  nlohmann::json j = to_json(grid);
  j["data"] = ds.source_path;
  detail::write_json_file(cfg.out + ".json", j);
  std::cout << "wrote " << cfg.out << ".csv and " << cfg.out << ".json ("
            << grid.cells.size() << " cells)\n";
  return 0;
}

/// test: boundary test of the contraction condition at the given theta.
inline int cmd_test(const RunConfig& cfg) {
  ModelSpec spec = detail::require_params(cfg);
  Dataset ds = detail::require_data(cfg);
  TestResult res = invertibility_test(ds.observations, spec, cfg.bandwidth);
  nlohmann::json j = to_json(res);
  j["theta"] = to_json(spec);
  j["data"] = ds.source_path;
  if (cfg.alpha) {
    j["alpha"] = *cfg.alpha;
    j["in_up"] = res.t_stat < normal_quantile(1.0 - *cfg.alpha);
    j["in_lo"] = res.t_stat < normal_quantile(*cfg.alpha);
  }
  detail::write_json_file(cfg.out + ".json", j);
  std::cout << "T_n = " << format_double(res.t_stat)
            << ", left-tail p = " << format_double(res.p_left) << ", wrote " << cfg.out
            << ".json\n";
  return 0;
}

/// diverge: filter the same series from two initializations and emit the gap
/// path plus its fitted decay rate.
inline int cmd_diverge(const RunConfig& cfg) {
  ModelSpec spec = detail::require_params(cfg);
  Dataset ds = detail::require_data(cfg);
  double a = cfg.f0_a.value_or(default_init(ds.observations, spec));
  double b = cfg.f0_b.value_or(a == 0.0 ? 1.0 : 11.0 * a);
  DivergenceDiagnostic diag = divergence_diagnostic(ds.observations, spec, a, b);

  std::ofstream out(cfg.out + ".csv");
  if (!out) throw DataError("cannot write file: " + cfg.out + ".csv");
  out << "t,abs_diff\n";
  for (std::size_t t = 0; t < diag.abs_diff.size(); ++t)
    out << t << "," << format_double(diag.abs_diff[t]) << "\n";

  nlohmann::json j{{"f0_a", a},
                   {"f0_b", b},
                   {"log_slope", diag.log_slope},
                   {"slope_valid", diag.slope_valid},
                   {"vanished", diag.vanished},
                   {"theta", to_json(spec)}};
  detail::write_json_file(cfg.out + ".json", j);
  std::cout << "gap at end " << format_double(diag.abs_diff.back()) << ", vanished "
            << (diag.vanished ? "yes" : "no") << ", wrote " << cfg.out << ".csv\n";
  return 0;
}

/// report: per dataset, the fitted row -- parameter estimates, standard
/// errors, the data-free sufficient-condition value, the empirical Lyapunov
/// value, and the boundary-test left-tail p-value.
inline int cmd_report(const RunConfig& cfg) {
  ModelKind kind = detail::require_model(cfg);
  std::vector<RunConfig::ReportEntry> entries = cfg.report_datasets;
  if (entries.empty()) {
    if (!cfg.data) throw ConfigError("report needs 'report.datasets' or --data");
    entries.push_back({*cfg.data, *cfg.data, cfg.column, cfg.transform});
  }

  std::ofstream out(cfg.out + ".csv");
  if (!out) throw DataError("cannot write file: " + cfg.out + ".csv");
  const auto& names = param_names(kind);
  out << "dataset";
  for (const auto& n : names) out << "," << n;
  for (const auto& n : names) out << ",se_" << n;
  out << ",feasible,lyapunov,p_value,status\n";

  for (const auto& entry : entries) {
    Dataset ds = ingest_csv(entry.data, entry.column, entry.transform);
    OptimizerOptions opts;
    opts.seed = cfg.seed;
    EstimationResult res = multi_start(ds.observations, kind, cfg.n_starts, cfg.seed,
                                       cfg.constrained, cfg.delta, opts);
    attach_standard_errors(ds.observations, res);

    double feasible = std::numeric_limits<double>::quiet_NaN();
    if (kind == ModelKind::beta_t_garch)
      feasible = feasible_condition_garch(res.theta_hat.garch());
    double p_value = std::numeric_limits<double>::quiet_NaN();
    try {
      p_value = invertibility_test(ds.observations, res.theta_hat, cfg.bandwidth).p_left;
    } catch (const NumericalError&) {
      // degenerate variance: leave the p-value empty
    }

    out << entry.name;
    auto vals = param_values(res.theta_hat);
    for (double v : vals) out << "," << format_double(v);
    for (std::size_t i = 0; i < names.size(); ++i)
      out << ","
          << (res.std_errors ? format_double((*res.std_errors)[i]) : std::string("nan"));
    out << "," << format_double(feasible) << "," << format_double(res.lyapunov_at_hat)
        << "," << format_double(p_value) << "," << res.status << "\n";

    std::cout << entry.name << ": loglik " << format_double(res.loglik) << ", lyapunov "
              << format_double(res.lyapunov_at_hat) << ", p " << format_double(p_value)
              << "\n";
  }
  std::cout << "wrote " << cfg.out << ".csv\n";
  return 0;
}

}  // namespace odml
