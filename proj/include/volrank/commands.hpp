#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "volrank/backtest.hpp"
#include "volrank/config.hpp"

namespace volrank {

/// Command-line overrides shared by the subcommands.
struct Overrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  bool plot_data = false;

  void apply(RunConfig& config) const;
};

/// Panels and region map named by the config (read from files or generated).
struct LoadedData {
  PanelSet panels;
  RegionMap regions;
};

LoadedData load_data(const RunConfig& config);

/// Generates the synthetic universe of the config into the output dir.
void cmd_synth(const RunConfig& config, std::ostream& log);

/// Runs the backtest and writes the report files; returns the report.
TauReport cmd_backtest(const RunConfig& config, std::ostream& log);

/// Prints target (when the period is inside the data) and every configured
/// scheme's estimate for one portfolio. The portfolio comes from
/// `portfolios_file` when given, otherwise from the generated universe of
/// the period.
void cmd_estimate(const RunConfig& config, const std::string& portfolio_id, const std::string& period,
                  const std::string& portfolios_file, std::ostream& out);

/// Checks whichever of returns.csv, loadings.csv, mcaps.csv, regions.csv and
/// portfolios.csv exist in `data_dir`. Returns the number of problems found
/// and writes one line per problem.
int cmd_validate(const std::string& data_dir, std::ostream& out);

}  // namespace volrank
