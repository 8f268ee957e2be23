#include "volrank/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "volrank/errors.hpp"
#include "volrank/kendall.hpp"
#include "volrank/parallel.hpp"
#include "volrank/preprocessing.hpp"
#include "volrank/random.hpp"

namespace volrank {

std::vector<MonthId> PeriodSchedule::starts() const {
  std::vector<MonthId> out;
  for (int i = 0; i < count; ++i) out.push_back(first + i * step);
  return out;
}

PeriodSchedule PeriodSchedule::reference() {
  return PeriodSchedule{MonthId::of(2013, 2), 97, 3, 1};
}

namespace {

double quadratic(const Eigen::MatrixXd& cov, const Eigen::VectorXd& w) { return w.dot(cov * w); }

}  // namespace

double target_volatility(const Portfolio& portfolio, const ReturnPanel& returns, MonthId period_start,
                         int width, const NearestPdOptions& repair) {
  const DayRange days = returns.calendar.months_days(period_start, width);
  const auto p = static_cast<Eigen::Index>(portfolio.members.size());
  Eigen::MatrixXd window(p, static_cast<Eigen::Index>(days.size()));
  Eigen::VectorXd w(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const auto& m = portfolio.members[static_cast<std::size_t>(i)];
    window.row(i) = returns.values.block(static_cast<Eigen::Index>(m.company),
                                         static_cast<Eigen::Index>(days.begin), 1,
                                         static_cast<Eigen::Index>(days.size()));
    w(i) = m.weight;
  }
  CovEstimate est = pairwise_cov(window);
  repair_in_place(est, repair);
  return checked_sqrt(quadratic(est.cov, w), w.cwiseAbs2().dot(est.cov.diagonal()));
}

bool SubsetDefinition::matches(const Portfolio& p) const {
  if (kind && p.kind != *kind) return false;
  if (origin && p.origin != *origin) return false;
  if (restriction_type && p.restriction.type != *restriction_type) return false;
  if (!restriction_name.empty() && p.restriction.name != restriction_name) return false;
  return true;
}

std::vector<SubsetDefinition> standard_subsets() {
  std::vector<SubsetDefinition> out;
  out.push_back({"all_long", PortfolioKind::long_only, std::nullopt, std::nullopt, ""});
  out.push_back({"all_long_short", PortfolioKind::long_short, std::nullopt, std::nullopt, ""});
  struct Scope {
    const char* name;
    std::optional<RestrictionType> type;
    const char* restriction;
  };
  const Scope scopes[] = {
      {"all", std::nullopt, ""},
      {"unrestricted", RestrictionType::unrestricted, ""},
      {"north_america", RestrictionType::subregion, "Northern America"},
  };
  for (const auto& scope : scopes) {
    for (Origin origin : {Origin::original, Origin::random}) {
      for (PortfolioKind kind : {PortfolioKind::long_only, PortfolioKind::long_short}) {
        std::string name = std::string(scope.name) + "_" +
                           (origin == Origin::original ? "original" : "random") + "_" +
                           std::string(to_string(kind));
        out.push_back({std::move(name), kind, origin, scope.type, scope.restriction});
      }
    }
  }
  return out;
}

std::optional<SubsetDefinition> find_standard_subset(const std::string& name) {
  for (auto& s : standard_subsets()) {
    if (s.name == name) return s;
  }
  return std::nullopt;
}

std::optional<std::size_t> TauReport::subset_index(const std::string& name) const {
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    if (subsets[i].name == name) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> TauReport::scheme_index(const std::string& name) const {
  for (std::size_t i = 0; i < scheme_names.size(); ++i) {
    if (scheme_names[i] == name) return i;
  }
  return std::nullopt;
}

BacktestInputs prepare_inputs(const PanelSet& raw, RegionMap regions, const FitConfig& fit,
                              unsigned workers) {
  PreprocessedPanels clean = apply_preprocessing(raw.loadings, raw.mcaps, raw.returns);
  BacktestInputs in;
  in.returns = raw.returns;
  in.factors = fit_panel(raw.returns, clean.loadings, clean.mcaps, clean.mask, fit, workers);
  in.loadings = std::move(clean.loadings);
  in.mcaps = std::move(clean.mcaps);
  in.mask = std::move(clean.mask);
  in.regions = std::move(regions);
  return in;
}

void validate_schedule(const BacktestInputs& inputs, const BacktestConfig& config) {
  if (config.schedule.count < 1) throw ConfigError("schedule has no test periods");
  if (config.schedule.width < 1 || config.schedule.step < 1) {
    throw ConfigError("period width and step must be positive");
  }
  if (config.schemes.empty() && config.extra_schemes.empty()) throw ConfigError("no schemes configured");
  int max_q = 0;
  for (const auto& s : config.schemes) {
    if (s.q < 1) throw ConfigError("window length must be positive: " + s.name());
    max_q = std::max(max_q, s.q);
  }
  const TradingCalendar& cal = inputs.returns.calendar;
  for (MonthId start : config.schedule.starts()) {
    const MonthId last = start + (config.schedule.width - 1);
    if (!cal.contains_month(start) || !cal.contains_month(last)) {
      throw WindowError("test period " + format_month(start) + " to " + format_month(last) +
                        " lies outside the calendar " + format_month(cal.first_month()) + " to " +
                        format_month(cal.last_month()));
    }
    // Loadings and caps of the month before the period are required.
    if (start - 1 < inputs.loadings.first_month ||
        start - 1 >= inputs.loadings.first_month + static_cast<int>(inputs.loadings.month_count())) {
      throw WindowError("no loadings for " + format_month(start - 1) + ", the month before period " +
                        format_month(start));
    }
    if (max_q > 0) cal.window(start, max_q);
  }
}

PortfolioUniverse period_portfolios(const BacktestInputs& inputs, const BacktestConfig& config,
                                    MonthId start) {
  PortfolioUniverse universe = build_universe_of_portfolios(inputs.loadings, inputs.mcaps, inputs.mask,
                                                            inputs.regions, start, config.rules);
  const std::size_t originals = universe.portfolios.size();
  for (std::size_t i = 0; i < originals; ++i) {
    for (int r = 1; r <= config.random_per_original; ++r) {
      const std::uint64_t seed = derive_seed(
          config.seed, {static_cast<std::uint64_t>(start.value), i, static_cast<std::uint64_t>(r)});
      universe.portfolios.push_back(resample_random(universe.portfolios[i], seed, config.random_draws, r));
    }
  }
  return universe;
}

PeriodRecord evaluate_period(const BacktestInputs& inputs, const BacktestConfig& config,
                             MonthId start) {
  PeriodRecord rec;
  rec.start = start;
  PortfolioUniverse universe = period_portfolios(inputs, config, start);
  rec.skipped = std::move(universe.skipped);
  rec.portfolios = std::move(universe.portfolios);

  std::vector<std::size_t> companies;
  for (const auto& p : rec.portfolios) {
    for (const auto& m : p.members) companies.push_back(m.company);
  }
  std::sort(companies.begin(), companies.end());
  companies.erase(std::unique(companies.begin(), companies.end()), companies.end());

  // Targets share one repaired covariance over the union of members; any
  // principal submatrix of it is again positive semidefinite.
  {
    const DayRange days = inputs.returns.calendar.months_days(start, config.schedule.width);
    Eigen::MatrixXd window(static_cast<Eigen::Index>(companies.size()), static_cast<Eigen::Index>(days.size()));
    std::map<std::size_t, Eigen::Index> row_of;
    for (std::size_t i = 0; i < companies.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      row_of.emplace(companies[i], row);
      window.row(row) = inputs.returns.values.block(static_cast<Eigen::Index>(companies[i]),
                                                    static_cast<Eigen::Index>(days.begin), 1,
                                                    static_cast<Eigen::Index>(days.size()));
    }
    CovEstimate all = pairwise_cov(window);
    repair_in_place(all, config.forecast.repair);
    if (all.repaired) ++rec.repaired_windows;
    rec.targets.reserve(rec.portfolios.size());
    for (const auto& p : rec.portfolios) {
      const auto n = static_cast<Eigen::Index>(p.members.size());
      std::vector<Eigen::Index> rows(p.members.size());
      Eigen::VectorXd w(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        rows[static_cast<std::size_t>(i)] = row_of.at(p.members[static_cast<std::size_t>(i)].company);
        w(i) = p.members[static_cast<std::size_t>(i)].weight;
      }
      const Eigen::MatrixXd cov = all.cov(rows, rows);
      rec.targets.push_back(checked_sqrt(quadratic(cov, w), w.cwiseAbs2().dot(cov.diagonal())));
    }
  }

  ForecastOptions forecast = config.forecast;
  forecast.workers = 1;
  const bool any_direct = std::any_of(config.schemes.begin(), config.schemes.end(),
                                      [](const SchemeId& s) { return s.approach == Approach::direct; });
  const bool any_factor = std::any_of(config.schemes.begin(), config.schemes.end(),
                                      [](const SchemeId& s) { return s.approach == Approach::factor; });
  std::optional<DirectModel> direct;
  std::optional<FactorModel> factor;
  if (any_direct) {
    direct = build_direct_model(inputs.returns, start, companies, config.schemes, forecast);
    rec.repaired_windows += direct->covariances.repaired_windows;
    for (std::size_t i = 0; i < direct->covariances.garch_fits.size(); ++i) {
      rec.garch_fits.emplace_back(inputs.returns.companies[direct->companies[i]],
                                  direct->covariances.garch_fits[i]);
    }
  }
  if (any_factor) {
    factor = build_factor_model(inputs.factors.factor_returns, inputs.factors.residuals, inputs.loadings,
                                start, config.schemes, forecast);
    rec.repaired_windows += factor->factor_covariances.repaired_windows;
    for (std::size_t i = 0; i < factor->factor_covariances.garch_fits.size(); ++i) {
      rec.garch_fits.emplace_back(inputs.factors.factor_returns.factors[i].name,
                                  factor->factor_covariances.garch_fits[i]);
    }
  }

  for (const auto& s : config.schemes) {
    std::vector<double> est;
    est.reserve(rec.portfolios.size());
    for (const auto& p : rec.portfolios) {
      est.push_back(s.approach == Approach::direct ? estimate(*direct, p, s) : estimate(*factor, p, s));
    }
    rec.estimates.push_back(std::move(est));
  }
  for (const auto& extra : config.extra_schemes) {
    std::vector<double> est;
    est.reserve(rec.portfolios.size());
    for (std::size_t i = 0; i < rec.portfolios.size(); ++i) est.push_back(extra.estimate(rec, i));
    rec.estimates.push_back(std::move(est));
  }
  return rec;
}

TauReport run_backtest(const BacktestInputs& inputs, const BacktestConfig& config) {
  validate_schedule(inputs, config);
  TauReport report;
  for (const auto& s : config.schemes) {
    report.scheme_names.push_back(s.name());
    report.scheme_ids.emplace_back(s);
  }
  for (const auto& e : config.extra_schemes) {
    report.scheme_names.push_back(e.name);
    report.scheme_ids.emplace_back(std::nullopt);
  }
  report.subsets = config.subsets;
  report.periods = config.schedule.starts();
  report.log = inputs.factors.log;

  const std::size_t n_periods = report.periods.size();
  const std::size_t n_schemes = report.scheme_names.size();
  const std::size_t n_subsets = report.subsets.size();
  report.per_period.assign(n_subsets, std::vector<std::vector<std::optional<double>>>(
                                          n_schemes, std::vector<std::optional<double>>(n_periods)));
  report.subset_sizes.assign(n_subsets, std::vector<std::size_t>(n_periods, 0));

  struct PeriodSummary {
    std::size_t originals = 0;
    std::size_t randoms = 0;
    std::size_t skipped = 0;
    std::size_t fallbacks = 0;
    std::size_t repaired = 0;
    std::vector<std::string> skip_log;
  };
  std::vector<PeriodSummary> summaries(n_periods);
  std::vector<PeriodRecord> records(config.keep_details ? n_periods : 0);

  parallel_for(n_periods, config.workers, [&](std::size_t t) {
    PeriodRecord rec = evaluate_period(inputs, config, report.periods[t]);
    PeriodSummary& sum = summaries[t];
    for (const auto& p : rec.portfolios) (p.origin == Origin::original ? sum.originals : sum.randoms)++;
    sum.skipped = rec.skipped.size();
    for (const auto& [name, fit] : rec.garch_fits) {
      if (!fit.converged()) ++sum.fallbacks;
    }
    sum.repaired = rec.repaired_windows;
    for (const auto& s : rec.skipped) sum.skip_log.push_back(format_month(rec.start) + " " + s);

    for (std::size_t b = 0; b < n_subsets; ++b) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < rec.portfolios.size(); ++i) {
        if (report.subsets[b].matches(rec.portfolios[i])) members.push_back(i);
      }
      report.subset_sizes[b][t] = members.size();
      std::vector<double> target(members.size());
      for (std::size_t i = 0; i < members.size(); ++i) target[i] = rec.targets[members[i]];
      for (std::size_t s = 0; s < n_schemes; ++s) {
        std::vector<double> est(members.size());
        for (std::size_t i = 0; i < members.size(); ++i) est[i] = rec.estimates[s][members[i]];
        report.per_period[b][s][t] = kendall_tau_b(est, target);
      }
    }
    if (config.keep_details) records[t] = std::move(rec);
  });

  for (const auto& sum : summaries) {
    report.original_portfolios += sum.originals;
    report.random_portfolios += sum.randoms;
    report.skipped_portfolios += sum.skipped;
    report.garch_fallbacks += sum.fallbacks;
    report.repaired_windows += sum.repaired;
    report.log.insert(report.log.end(), sum.skip_log.begin(), sum.skip_log.end());
  }

  report.mean.assign(n_subsets, std::vector<TauCell>(n_schemes));
  for (std::size_t b = 0; b < n_subsets; ++b) {
    for (std::size_t s = 0; s < n_schemes; ++s) {
      TauCell& cell = report.mean[b][s];
      double total = 0.0;
      for (const auto& tau : report.per_period[b][s]) {
        if (tau) {
          total += *tau;
          ++cell.periods_used;
        } else {
          ++cell.periods_undefined;
        }
      }
      cell.mean = cell.periods_used > 0 ? total / static_cast<double>(cell.periods_used)
                                        : std::numeric_limits<double>::quiet_NaN();
    }
  }
  report.details = std::move(records);
  return report;
}

}  // namespace volrank
