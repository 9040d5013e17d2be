#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "odml/cli.hpp"

namespace {

struct FlagOverrides {
  std::optional<std::string> config, data, column, transform, model, out;
  std::optional<double> delta, alpha;
  std::optional<int> bandwidth, n_starts;
  std::optional<std::uint64_t> seed;
  bool constrained = false;
};

odml::RunConfig assemble(const FlagOverrides& fl) {
  odml::RunConfig cfg = fl.config ? odml::load_config(*fl.config) : odml::RunConfig{};
  if (fl.data) cfg.data = *fl.data;
  if (fl.column) cfg.column = *fl.column;
  if (fl.transform) cfg.transform = odml::transform_from_string(*fl.transform);
  if (fl.model) cfg.model = odml::model_kind_from_string(*fl.model);
  if (fl.delta) cfg.delta = *fl.delta;
  if (fl.alpha) cfg.alpha = *fl.alpha;
  if (fl.bandwidth) cfg.bandwidth = *fl.bandwidth;
  if (fl.seed) cfg.seed = *fl.seed;
  if (fl.n_starts) cfg.n_starts = *fl.n_starts;
  if (fl.constrained) cfg.constrained = true;
  if (fl.out) cfg.out = *fl.out;
  if (!(cfg.delta > 0.0)) throw odml::ConfigError("delta must be positive");
  if (cfg.alpha && !(*cfg.alpha > 0.0 && *cfg.alpha <= 0.5))
    throw odml::ConfigError("alpha must lie in (0, 0.5]");
  if (cfg.n_starts < 1) throw odml::ConfigError("n_starts must be >= 1");
  return cfg;
}

void add_common_flags(CLI::App* cmd, FlagOverrides& fl) {
  cmd->add_option("--config", fl.config, "JSON config file (flags override its fields)");
  cmd->add_option("--data", fl.data, "input CSV file");
  cmd->add_option("--column", fl.column, "CSV column name or 0-based index");
  cmd->add_option("--transform", fl.transform, "none | log_return | log_return_x100");
  cmd->add_option("--model", fl.model, "beta_t_garch | tv_ar | t_location");
  cmd->add_option("--delta", fl.delta, "margin for the estimated region");
  cmd->add_option("--alpha", fl.alpha, "confidence level for the region bounds");
  cmd->add_option("--bandwidth", fl.bandwidth, "Newey-West lag truncation");
  cmd->add_option("--seed", fl.seed, "RNG seed");
  cmd->add_option("--n-starts", fl.n_starts, "number of optimizer starts");
  cmd->add_flag("--constrained", fl.constrained, "restrict ML to the estimated region");
  cmd->add_option("--out", fl.out, "output path prefix");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Observation-driven time-series models: filtering, ML estimation, "
               "invertibility regions, and boundary tests"};
  app.require_subcommand(1);

  FlagOverrides fl;
  int (*run)(const odml::RunConfig&) = nullptr;

  auto* sim = app.add_subcommand("simulate", "simulate a model as the data generating process");
  auto* fit = app.add_subcommand("fit", "maximum-likelihood estimation");
  auto* region = app.add_subcommand("region", "evaluate the invertibility region on a grid");
  auto* test = app.add_subcommand("test", "boundary test of the contraction condition");
  auto* diverge = app.add_subcommand("diverge", "initialization-divergence diagnostic");
  auto* report = app.add_subcommand("report", "fitted summary table per dataset");
  for (auto* cmd : {sim, fit, region, test, diverge, report}) add_common_flags(cmd, fl);

  sim->callback([&] { run = odml::cmd_simulate; });
  fit->callback([&] { run = odml::cmd_fit; });
  region->callback([&] { run = odml::cmd_region; });
  test->callback([&] { run = odml::cmd_test; });
  diverge->callback([&] { run = odml::cmd_diverge; });
  report->callback([&] { run = odml::cmd_report; });

  CLI11_PARSE(app, argc, argv);

  try {
    return run(assemble(fl));
  } catch (const odml::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const odml::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}
