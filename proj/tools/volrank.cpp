#include <CLI11.hpp>
#include <iostream>

#include "volrank/commands.hpp"
#include "volrank/errors.hpp"

namespace {

int fail(const char* kind, const std::exception& e) {
  std::cerr << "error[" << kind << "]: " << e.what() << '\n';
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Portfolio volatility forecasting and ranking backtests"};
  app.require_subcommand(1);

  std::string config_path;
  std::string portfolio_id;
  std::string period;
  std::string portfolios_file;
  std::string data_dir;
  std::string out;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  bool plot_data = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run config")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "Output directory (overrides output.dir)");
    cmd->add_option("--seed", seed, "Top-level seed (overrides seed)");
    cmd->add_option("--workers", workers, "Worker threads (overrides workers)")->check(CLI::PositiveNumber);
  };

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic universe");
  add_common(synth);
  CLI::App* backtest = app.add_subcommand("backtest", "Run the rolling backtest and write reports");
  add_common(backtest);
  backtest->add_flag("--plot-data", plot_data, "Also write per-period tau series");
  CLI::App* estimate = app.add_subcommand("estimate", "Print every scheme's estimate for one portfolio");
  add_common(estimate);
  estimate->add_option("--portfolio", portfolio_id, "Portfolio id")->required();
  estimate->add_option("--period", period, "First month of the test period (YYYY-MM)")->required();
  estimate->add_option("--portfolios", portfolios_file, "portfolio_id,period,company,weight CSV")
      ->check(CLI::ExistingFile);
  CLI::App* validate = app.add_subcommand("validate", "Check data files and portfolio invariants");
  validate->add_option("data_dir", data_dir, "Directory with the data files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return volrank::cmd_validate(data_dir, std::cout) == 0 ? 0 : 1;

    volrank::RunConfig config = volrank::load_run_config(config_path);
    volrank::Overrides overrides;
    CLI::App* used = app.get_subcommands().front();
    if (used->count("--out")) overrides.out = out;
    if (used->count("--seed")) overrides.seed = seed;
    if (used->count("--workers")) overrides.workers = workers;
    overrides.plot_data = plot_data;
    overrides.apply(config);

    if (synth->parsed()) {
      volrank::cmd_synth(config, std::cerr);
    } else if (backtest->parsed()) {
      volrank::cmd_backtest(config, std::cerr);
    } else if (estimate->parsed()) {
      volrank::cmd_estimate(config, portfolio_id, period, portfolios_file, std::cout);
    }
  } catch (const volrank::ConfigError& e) {
    return fail("config", e);
  } catch (const volrank::ParseError& e) {
    return fail("parse", e);
  } catch (const volrank::ConflictError& e) {
    return fail("conflict", e);
  } catch (const volrank::WindowError& e) {
    return fail("window", e);
  } catch (const volrank::NearestPdError& e) {
    return fail("numeric", e);
  } catch (const volrank::ConsistencyError& e) {
    return fail("numeric", e);
  } catch (const std::exception& e) {
    return fail("runtime", e);
  }
  return 0;
}
