#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "volrank/backtest.hpp"
#include "volrank/factor_model.hpp"
#include "volrank/synth.hpp"

namespace volrank {

/// Input panel files. Relative paths are resolved against the directory of
/// the config file.
struct DataPaths {
  std::string returns;
  std::string loadings;
  std::string mcaps;
  std::string regions;  // empty: built-in region map

  bool operator==(const DataPaths&) const = default;
};

struct RunConfig {
  /// Exactly one of `data` and `synth` is set.
  std::optional<DataPaths> data;
  std::optional<SynthConfig> synth;

  std::string first_period = "2013-02";
  int periods = 97;
  int period_months = 3;
  int period_step = 1;

  std::vector<std::string> approaches = {"direct", "factor"};
  std::vector<std::string> variance_models = {"naive", "garch"};
  std::vector<int> windows = {1, 3, 6, 12};
  std::vector<std::string> subsets;  // empty: every standard subset

  std::string weighting = "market_cap";
  bool constrain_countries = true;
  bool constrain_industries = true;

  double min_market_cap = 200e6;
  int min_members = 40;
  int max_members = 300;
  int min_per_side = 20;
  int random_per_original = 2;
  int random_draws = 50;

  int garch_history_months = 36;
  int garch_min_observations = 100;
  int garch_max_iterations = 500;
  double garch_gradient_tolerance = 1e-6;
  double garch_persistence_cap = 0.999;
  bool garch_constant_variance = false;

  double repair_tol = 1e-8;
  int repair_max_iterations = 200;
  double repair_convergence = 1e-10;

  std::string output_dir = "out";
  bool plot_data = false;
  bool write_estimates = false;
  bool write_garch_diagnostics = false;

  std::uint64_t seed = 1;
  unsigned workers = 1;

  /// Directory relative paths are resolved against (not serialized).
  std::string base_dir = ".";

  bool operator==(const RunConfig&) const = default;

  std::vector<SchemeId> schemes() const;
  std::vector<SubsetDefinition> subset_definitions() const;
  PeriodSchedule schedule() const;
  FitConfig fit_config() const;
  PortfolioRules rules() const;
  ForecastOptions forecast_options() const;
  BacktestConfig backtest_config() const;
  std::string resolve(const std::string& path) const;
};

/// Parses the JSON config text (comments allowed). Unknown keys and invalid
/// values raise ConfigError.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);
std::string serialize_run_config(const RunConfig& config);

SynthConfig parse_synth_config(const std::string& text);
std::string serialize_synth_config(const SynthConfig& config);

}  // namespace volrank
