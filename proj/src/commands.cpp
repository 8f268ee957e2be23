#include "volrank/commands.hpp"

#include <filesystem>
#include <ostream>
#include <set>

#include "volrank/csv.hpp"
#include "volrank/errors.hpp"
#include "volrank/panel_io.hpp"
#include "volrank/preprocessing.hpp"
#include "volrank/report.hpp"
#include "volrank/synth.hpp"

namespace volrank {

namespace fs = std::filesystem;

void Overrides::apply(RunConfig& config) const {
  if (out) config.output_dir = fs::absolute(*out).string();
  if (seed) config.seed = *seed;
  if (workers) config.workers = *workers;
  if (plot_data) config.plot_data = true;
}

namespace {

SynthConfig effective_synth(const RunConfig& config) {
  SynthConfig s = *config.synth;
  s.seed = config.seed;
  return s;
}

}  // namespace

LoadedData load_data(const RunConfig& config) {
  LoadedData d;
  if (config.synth) {
    d.panels = generate(effective_synth(config)).panels;
    d.regions = RegionMap::standard();
    return d;
  }
  const DataPaths& p = *config.data;
  const std::string returns = config.resolve(p.returns);
  for (const auto& f : {returns, config.resolve(p.loadings), config.resolve(p.mcaps)}) {
    if (!fs::exists(f)) throw std::runtime_error("missing input file " + f);
  }
  d.panels = load_panels(returns, config.resolve(p.loadings), config.resolve(p.mcaps), infer_calendar(returns));
  d.regions = p.regions.empty() ? RegionMap::standard() : RegionMap::read_csv(config.resolve(p.regions));
  return d;
}

void cmd_synth(const RunConfig& config, std::ostream& log) {
  if (!config.synth) throw ConfigError("synth needs a 'synth' section in the config");
  const std::string dir = config.resolve(config.output_dir);
  const SynthConfig s = effective_synth(config);
  const SynthData data = generate(s);
  write_synth(dir, data);
  auto out = csv::open_out((fs::path(dir) / "synth_config.json").string());
  out << serialize_synth_config(s);
  log << "wrote " << data.panels.returns.company_count() << " companies x " << data.panels.returns.day_count()
      << " days to " << dir << '\n';
}

TauReport cmd_backtest(const RunConfig& config, std::ostream& log) {
  const LoadedData data = load_data(config);
  const BacktestInputs inputs = prepare_inputs(data.panels, data.regions, config.fit_config(), config.workers);
  BacktestConfig bc = config.backtest_config();
  bc.keep_details = config.write_estimates || config.write_garch_diagnostics;
  TauReport report = run_backtest(inputs, bc);

  const std::string dir = config.resolve(config.output_dir);
  write_mean_tau_tables(dir, report);
  write_summary(dir, report);
  if (config.plot_data) write_tau_series(dir, report);
  if (config.write_estimates) write_estimates(dir, report);
  if (config.write_garch_diagnostics) write_garch_diagnostics(dir, report);
  log << report.periods.size() << " periods, " << report.original_portfolios << " original and "
      << report.random_portfolios << " random portfolio-periods, " << report.skipped_portfolios
      << " skipped; reports in " << dir << '\n';
  return report;
}

void cmd_estimate(const RunConfig& config, const std::string& portfolio_id, const std::string& period,
                  const std::string& portfolios_file, std::ostream& out) {
  const MonthId start = parse_month(period);
  const LoadedData data = load_data(config);
  const BacktestInputs inputs = prepare_inputs(data.panels, data.regions, config.fit_config(), config.workers);
  const BacktestConfig bc = config.backtest_config();

  std::optional<Portfolio> found;
  if (!portfolios_file.empty()) {
    for (auto& p : read_portfolios_csv(portfolios_file, inputs.returns.companies)) {
      if (p.id == portfolio_id && p.period == start) found = std::move(p);
    }
  } else {
    for (auto& p : period_portfolios(inputs, bc, start).portfolios) {
      if (p.id == portfolio_id) found = std::move(p);
    }
  }
  if (!found) throw std::runtime_error("no portfolio '" + portfolio_id + "' for period " + period);

  const TradingCalendar& cal = inputs.returns.calendar;
  out << "portfolio " << found->id << " period " << format_month(start) << " members " << found->size() << '\n';
  if (cal.contains_month(start) && cal.contains_month(start + (bc.schedule.width - 1))) {
    out << "target " << csv::format_double(target_volatility(*found, inputs.returns, start, bc.schedule.width,
                                                             bc.forecast.repair))
        << '\n';
  }
  for (const auto& s : bc.schemes) {
    const double v = s.approach == Approach::direct
                         ? estimate_direct(*found, inputs.returns, s, start, bc.forecast)
                         : estimate_factor(*found, inputs.factors.factor_returns, inputs.factors.residuals,
                                           inputs.loadings, s, start, bc.forecast);
    out << s.name() << ' ' << csv::format_double(v) << '\n';
  }
}

int cmd_validate(const std::string& data_dir, std::ostream& out) {
  int problems = 0;
  auto problem = [&](const std::string& what) {
    out << "problem: " << what << '\n';
    ++problems;
  };
  const fs::path dir(data_dir);
  if (!fs::is_directory(dir)) {
    problem("not a directory: " + data_dir);
    return problems;
  }
  const fs::path returns = dir / "returns.csv";
  const fs::path loadings = dir / "loadings.csv";
  const fs::path mcaps = dir / "mcaps.csv";
  const fs::path portfolios = dir / "portfolios.csv";
  const fs::path regions = dir / "regions.csv";

  std::optional<PanelSet> panels;
  const bool any_panel = fs::exists(returns) || fs::exists(loadings) || fs::exists(mcaps);
  if (any_panel) {
    bool complete = true;
    for (const auto& f : {returns, loadings, mcaps}) {
      if (!fs::exists(f)) {
        problem("missing file " + f.string());
        complete = false;
      }
    }
    if (complete) {
      try {
        panels = load_panels(returns.string(), loadings.string(), mcaps.string(), infer_calendar(returns.string()));
        const PreprocessedPanels clean = apply_preprocessing(panels->loadings, panels->mcaps, panels->returns);
        std::size_t proxied = 0;
        for (Eigen::Index i = 0; i < clean.mcaps.proxied.size(); ++i) proxied += clean.mcaps.proxied(i) ? 1 : 0;
        out << "panels: " << panels->returns.company_count() << " companies, " << panels->returns.day_count()
            << " days, " << panels->loadings.factor_count() << " factors, " << panels->returns.missing_count()
            << " missing return cells, " << proxied << " proxied caps\n";
      } catch (const std::exception& e) {
        problem(e.what());
        panels.reset();
      }
    }
  }
  if (fs::exists(regions)) {
    try {
      const RegionMap m = RegionMap::read_csv(regions.string());
      out << "regions: " << m.entries().size() << " countries\n";
    } catch (const std::exception& e) {
      problem(e.what());
    }
  }
  if (fs::exists(portfolios)) {
    std::vector<std::string> companies;
    if (panels) {
      companies = panels->returns.companies;
    } else {
      std::set<std::string> names;
      try {
        csv::read(portfolios.string(), "portfolio_id,period,company,weight",
                  [&](const auto& f, std::size_t) { names.emplace(f[2]); });
      } catch (const std::exception& e) {
        problem(e.what());
      }
      companies.assign(names.begin(), names.end());
    }
    try {
      const auto list = read_portfolios_csv(portfolios.string(), companies);
      for (const auto& p : list) {
        for (const auto& v : check_invariants(p, PortfolioRules{}, 1e-9)) problem(v + " (period " + format_month(p.period) + ")");
      }
      out << "portfolios: " << list.size() << " checked\n";
    } catch (const std::exception& e) {
      problem(e.what());
    }
  }
  if (!any_panel && !fs::exists(portfolios) && !fs::exists(regions)) problem("no known data files in " + data_dir);
  out << (problems == 0 ? "ok" : std::to_string(problems) + " problem(s)") << '\n';
  return problems;
}

}  // namespace volrank
