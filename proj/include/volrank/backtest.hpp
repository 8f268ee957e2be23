#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "volrank/covariance.hpp"
#include "volrank/factor_model.hpp"
#include "volrank/panels.hpp"
#include "volrank/portfolio.hpp"
#include "volrank/vol_forecast.hpp"

namespace volrank {

/// Test periods of `width` calendar months, starting every `step` months.
struct PeriodSchedule {
  MonthId first;
  int count = 0;
  int width = 3;
  int step = 1;

  std::vector<MonthId> starts() const;
  /// 97 periods, Feb-Apr 2013 through Feb-Apr 2021.
  static PeriodSchedule reference();
};

/// sqrt(w' Sigma(T) w) with Sigma(T) the pairwise sample covariance of the
/// members' returns over the `width` months starting at `period_start`.
/// The backtest repairs Sigma(T) once over all members of a period, so with
/// missing data its targets can differ slightly from this single-portfolio
/// version.
double target_volatility(const Portfolio& portfolio, const ReturnPanel& returns,
                         MonthId period_start, int width = 3,
                         const NearestPdOptions& repair = {});

/// Named filter on portfolio kind, origin and restriction. Unset fields
/// match everything.
struct SubsetDefinition {
  std::string name;
  std::optional<PortfolioKind> kind;
  std::optional<Origin> origin;
  std::optional<RestrictionType> restriction_type;
  std::string restriction_name;

  bool matches(const Portfolio& p) const;
};

/// All/unrestricted/North-American subsets split by kind and origin.
std::vector<SubsetDefinition> standard_subsets();
std::optional<SubsetDefinition> find_standard_subset(const std::string& name);

/// Cleaned panels plus the fitted factor model; built once per run.
struct BacktestInputs {
  ReturnPanel returns;
  LoadingPanel loadings;
  MarketCapSeries mcaps;
  UniverseMask mask;
  FactorModelFit factors;
  RegionMap regions;
};

BacktestInputs prepare_inputs(const PanelSet& raw, RegionMap regions, const FitConfig& fit,
                              unsigned workers = 1);

struct PeriodRecord;

/// Extra estimator evaluated next to the configured schemes (used to inject
/// reference rankings in tests).
struct ExtraScheme {
  std::string name;
  std::function<double(const PeriodRecord&, std::size_t portfolio)> estimate;
};

struct BacktestConfig {
  std::vector<SchemeId> schemes;
  std::vector<SubsetDefinition> subsets;
  PeriodSchedule schedule;
  PortfolioRules rules;
  int random_per_original = 2;
  int random_draws = 50;
  std::uint64_t seed = 1;
  ForecastOptions forecast;
  unsigned workers = 1;
  std::vector<ExtraScheme> extra_schemes;
  /// Keep per-period portfolios, targets and estimates in the report.
  bool keep_details = false;
};

struct PeriodRecord {
  MonthId start;
  std::vector<Portfolio> portfolios;
  std::vector<double> targets;
  /// Estimates per scheme, aligned with `portfolios`; same order as
  /// TauReport::scheme_names.
  std::vector<std::vector<double>> estimates;
  std::vector<std::string> skipped;
  std::vector<std::pair<std::string, GarchFit>> garch_fits;
  std::size_t repaired_windows = 0;
};

struct TauCell {
  double mean = 0.0;  // NaN when no period had a defined tau
  std::size_t periods_used = 0;
  std::size_t periods_undefined = 0;
};

struct TauReport {
  std::vector<std::string> scheme_names;
  std::vector<std::optional<SchemeId>> scheme_ids;  // nullopt for extra schemes
  std::vector<SubsetDefinition> subsets;
  std::vector<MonthId> periods;
  /// [subset][scheme][period]
  std::vector<std::vector<std::vector<std::optional<double>>>> per_period;
  /// [subset][scheme]
  std::vector<std::vector<TauCell>> mean;
  /// [subset][period]
  std::vector<std::vector<std::size_t>> subset_sizes;
  std::size_t original_portfolios = 0;  // summed over periods
  std::size_t random_portfolios = 0;
  std::size_t skipped_portfolios = 0;
  std::size_t garch_fallbacks = 0;
  std::size_t repaired_windows = 0;
  std::vector<std::string> log;
  std::vector<PeriodRecord> details;  // only with keep_details

  std::optional<std::size_t> subset_index(const std::string& name) const;
  std::optional<std::size_t> scheme_index(const std::string& name) const;
};

/// Throws WindowError when a period or an estimation window leaves the
/// calendar and ConfigError for an empty schedule or scheme list.
void validate_schedule(const BacktestInputs& inputs, const BacktestConfig& config);

TauReport run_backtest(const BacktestInputs& inputs, const BacktestConfig& config);

/// Original portfolios of the period followed by their random resamples
/// (seeded from the config seed, the period and the original's position).
PortfolioUniverse period_portfolios(const BacktestInputs& inputs, const BacktestConfig& config,
                                    MonthId start);

/// Everything computed for one period (exposed for `estimate`).
PeriodRecord evaluate_period(const BacktestInputs& inputs, const BacktestConfig& config,
                             MonthId start);

}  // namespace volrank
