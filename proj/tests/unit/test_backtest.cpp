#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "volrank/backtest.hpp"
#include "volrank/errors.hpp"
#include "volrank/kendall.hpp"
#include "volrank/synth.hpp"

using namespace volrank;

namespace {

struct Fixture {
  BacktestInputs inputs;
  BacktestConfig config;
};

// 150 companies from 2011-01 through 2012-06; two test periods starting
// 2012-01 and 2012-02, windows of 1 and 3 months, one year of GARCH history.
Fixture make_fixture(double missing_rate) {
  SynthConfig s;
  s.n_companies = 150;
  s.n_countries = 3;
  s.n_days = 390;
  s.missing_rate = missing_rate;
  s.garch = {{0.05, 0.08, 0.87}};
  s.seed = 17;
  const SynthData d = generate(s);
  Fixture out;
  out.inputs = prepare_inputs(d.panels, RegionMap::standard(), FitConfig{});
  const int windows[] = {1, 3};
  out.config.schemes = all_schemes(windows);
  out.config.subsets = standard_subsets();
  out.config.schedule = {MonthId::of(2012, 1), 2};
  out.config.rules.min_members = 20;
  out.config.rules.min_per_side = 8;
  out.config.forecast.garch_history_months = 12;
  out.config.seed = 3;
  out.config.keep_details = true;
  return out;
}

const Fixture& fixture() {
  static const Fixture f = make_fixture(0.01);
  return f;
}

ReturnPanel panel_from(const Eigen::MatrixXd& values, const TradingCalendar& cal) {
  ReturnPanel r;
  for (Eigen::Index i = 0; i < values.rows(); ++i) r.companies.push_back("c" + std::to_string(i));
  r.calendar = cal;
  r.values = values;
  return r;
}

}  // namespace

TEST(Schedule, ReferenceCoversFeb2013ToFeb2021) {
  const PeriodSchedule s = PeriodSchedule::reference();
  const auto starts = s.starts();
  ASSERT_EQ(starts.size(), 97u);
  EXPECT_EQ(starts.front(), MonthId::of(2013, 2));
  EXPECT_EQ(starts.back(), MonthId::of(2021, 2));
  EXPECT_EQ(s.width, 3);
  for (std::size_t i = 1; i < starts.size(); ++i) EXPECT_EQ(starts[i] - starts[i - 1], 1);
  const PeriodSchedule quarterly{MonthId::of(2020, 1), 3, 3, 3};
  EXPECT_EQ(quarterly.starts().back(), MonthId::of(2020, 7));
}

TEST(Subsets, StandardDefinitions) {
  const auto subsets = standard_subsets();
  ASSERT_EQ(subsets.size(), 14u);
  std::set<std::string> names;
  for (const auto& s : subsets) names.insert(s.name);
  EXPECT_EQ(names.size(), 14u);
  for (const char* n : {"all_long", "all_long_short", "all_original_long", "unrestricted_random_long_short",
                        "north_america_original_long"}) {
    EXPECT_TRUE(names.count(n)) << n;
  }
  EXPECT_FALSE(find_standard_subset("bogus"));

  Portfolio p;
  p.kind = PortfolioKind::long_only;
  p.origin = Origin::random;
  p.restriction = {RestrictionType::subregion, "Northern America"};
  EXPECT_TRUE(find_standard_subset("all_long")->matches(p));
  EXPECT_TRUE(find_standard_subset("north_america_random_long")->matches(p));
  EXPECT_FALSE(find_standard_subset("north_america_original_long")->matches(p));
  EXPECT_FALSE(find_standard_subset("unrestricted_random_long")->matches(p));
  EXPECT_FALSE(find_standard_subset("all_long_short")->matches(p));
}

TEST(TargetVolatility, SingleCompanyIsSampleStdev) {
  const auto& in = fixture().inputs;
  Portfolio p;
  p.members = {{7, 1.0}};
  const MonthId start = MonthId::of(2012, 2);
  const DayRange d = in.returns.calendar.months_days(start, 3);
  const Eigen::MatrixXd row =
      in.returns.values.block(7, static_cast<Eigen::Index>(d.begin), 1, static_cast<Eigen::Index>(d.size()));
  const double expected = std::sqrt(oracle::pairwise_cov(row)(0, 0));
  EXPECT_NEAR(target_volatility(p, in.returns, start), expected, 1e-15);
}

TEST(TargetVolatility, EqualsStdevOfPortfolioReturnSeries) {
  SynthConfig s;
  s.n_companies = 20;
  s.n_days = 150;
  const SynthData d = generate(s);
  Portfolio p;
  for (std::size_t k = 0; k < 20; ++k) p.members.push_back({k, (k % 3 == 0 ? -1.0 : 1.0) / 20.0});
  const MonthId start = MonthId::of(2011, 3);
  const DayRange days = d.panels.returns.calendar.months_days(start, 3);
  std::vector<double> series;
  for (std::size_t t = days.begin; t < days.end; ++t) {
    double r = 0;
    for (const auto& m : p.members) r += m.weight * d.panels.returns.values(static_cast<Eigen::Index>(m.company), static_cast<Eigen::Index>(t));
    series.push_back(r);
  }
  Eigen::MatrixXd x(1, static_cast<Eigen::Index>(series.size()));
  for (std::size_t t = 0; t < series.size(); ++t) x(0, static_cast<Eigen::Index>(t)) = series[t];
  const double expected = std::sqrt(oracle::sample_cov(x)(0, 0));
  EXPECT_NEAR(target_volatility(p, d.panels.returns, start), expected, 1e-12 * expected);
}

TEST(TargetVolatility, AllMissingIsZero) {
  SynthConfig s;
  s.n_companies = 3;
  s.n_days = 100;
  const SynthData d = generate(s);
  Eigen::MatrixXd v = d.panels.returns.values;
  const MonthId start = MonthId::of(2011, 2);
  const DayRange days = d.panels.returns.calendar.months_days(start, 3);
  v.middleCols(static_cast<Eigen::Index>(days.begin), static_cast<Eigen::Index>(days.size())).setConstant(kMissing);
  Portfolio p;
  p.members = {{0, 0.5}, {1, 0.3}, {2, 0.2}};
  EXPECT_EQ(target_volatility(p, panel_from(v, d.panels.returns.calendar), start), 0.0);
}

TEST(Backtest, OracleSchemeRanksPerfectly) {
  BacktestConfig config = fixture().config;
  config.extra_schemes.push_back({"oracle", [](const PeriodRecord& r, std::size_t i) { return r.targets[i]; }});
  const TauReport report = run_backtest(fixture().inputs, config);
  const std::size_t oracle_col = *report.scheme_index("oracle");
  EXPECT_FALSE(report.scheme_ids[oracle_col].has_value());
  std::size_t defined = 0;
  for (std::size_t b = 0; b < report.subsets.size(); ++b) {
    for (const auto& tau : report.per_period[b][oracle_col]) {
      if (!tau) continue;
      ++defined;
      EXPECT_EQ(*tau, 1.0) << report.subsets[b].name;
    }
    if (report.mean[b][oracle_col].periods_used > 0) EXPECT_EQ(report.mean[b][oracle_col].mean, 1.0);
  }
  EXPECT_GT(defined, 10u);
}

TEST(Backtest, ReportIsInternallyConsistent) {
  const TauReport report = run_backtest(fixture().inputs, fixture().config);
  ASSERT_EQ(report.scheme_names.size(), 8u);
  ASSERT_EQ(report.periods.size(), 2u);
  ASSERT_EQ(report.details.size(), 2u);
  EXPECT_GT(report.original_portfolios, 0u);
  EXPECT_EQ(report.random_portfolios, 2 * report.original_portfolios);
  for (std::size_t b = 0; b < report.subsets.size(); ++b) {
    for (std::size_t s = 0; s < report.scheme_names.size(); ++s) {
      double sum = 0;
      std::size_t used = 0, undefined = 0;
      for (std::size_t t = 0; t < report.periods.size(); ++t) {
        const auto& tau = report.per_period[b][s][t];
        if (!tau) {
          ++undefined;
          continue;
        }
        EXPECT_GE(*tau, -1.0);
        EXPECT_LE(*tau, 1.0);
        sum += *tau;
        ++used;
      }
      const TauCell& cell = report.mean[b][s];
      EXPECT_EQ(cell.periods_used, used);
      EXPECT_EQ(cell.periods_undefined, undefined);
      if (used == 0) {
        EXPECT_TRUE(std::isnan(cell.mean));
      } else {
        EXPECT_NEAR(cell.mean, sum / static_cast<double>(used), 1e-15);
      }
    }
  }
  // Recompute tau for one subset from the kept details with the brute-force oracle.
  const std::size_t b = *report.subset_index("all_long");
  for (std::size_t t = 0; t < report.periods.size(); ++t) {
    const PeriodRecord& rec = report.details[t];
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < rec.portfolios.size(); ++i) {
      if (report.subsets[b].matches(rec.portfolios[i])) members.push_back(i);
    }
    EXPECT_EQ(report.subset_sizes[b][t], members.size());
    for (std::size_t s = 0; s < report.scheme_names.size(); ++s) {
      std::vector<double> target, est;
      for (std::size_t i : members) {
        target.push_back(rec.targets[i]);
        est.push_back(rec.estimates[s][i]);
        EXPECT_TRUE(std::isfinite(rec.estimates[s][i]));
        EXPECT_GE(rec.estimates[s][i], 0.0);
      }
      const double expected = oracle::tau_b(est, target);
      ASSERT_TRUE(report.per_period[b][s][t].has_value());
      EXPECT_NEAR(*report.per_period[b][s][t], expected, 1e-15);
    }
  }
}

TEST(Backtest, TargetsMatchSinglePortfolioVersion) {
  // Complete data: the period covariance needs no repair and both routes agree.
  const Fixture complete = make_fixture(0.0);
  const PeriodRecord rec = evaluate_period(complete.inputs, complete.config, MonthId::of(2012, 1));
  ASSERT_EQ(rec.targets.size(), rec.portfolios.size());
  ASSERT_EQ(rec.estimates.size(), complete.config.schemes.size());
  for (std::size_t i = 0; i < rec.portfolios.size(); i += 5) {
    const double single = target_volatility(rec.portfolios[i], complete.inputs.returns, rec.start);
    EXPECT_NEAR(rec.targets[i], single, 1e-12 * single) << rec.portfolios[i].id;
  }
  // With missing cells the shared repair moves targets only slightly.
  const auto& f = fixture();
  const PeriodRecord noisy = evaluate_period(f.inputs, f.config, MonthId::of(2012, 1));
  for (std::size_t i = 0; i < noisy.portfolios.size(); i += 5) {
    const double single = target_volatility(noisy.portfolios[i], f.inputs.returns, noisy.start);
    EXPECT_NEAR(noisy.targets[i], single, 0.01 * single) << noisy.portfolios[i].id;
  }
}

TEST(Backtest, WorkerCountDoesNotChangeResults) {
  BacktestConfig config = fixture().config;
  config.keep_details = false;
  const TauReport one = run_backtest(fixture().inputs, config);
  config.workers = 2;
  const TauReport two = run_backtest(fixture().inputs, config);
  EXPECT_EQ(one.per_period, two.per_period);
}

TEST(Backtest, PortfoliosAreDeterministicPerPeriod) {
  const auto& f = fixture();
  const PortfolioUniverse a = period_portfolios(f.inputs, f.config, MonthId::of(2012, 2));
  const PortfolioUniverse b = period_portfolios(f.inputs, f.config, MonthId::of(2012, 2));
  ASSERT_EQ(a.portfolios.size(), b.portfolios.size());
  std::size_t originals = 0;
  for (std::size_t i = 0; i < a.portfolios.size(); ++i) {
    EXPECT_EQ(a.portfolios[i].id, b.portfolios[i].id);
    EXPECT_EQ(a.portfolios[i].members.size(), b.portfolios[i].members.size());
    if (a.portfolios[i].origin == Origin::original) ++originals;
  }
  EXPECT_EQ(a.portfolios.size(), 3 * originals);
}

TEST(Backtest, ValidateScheduleErrors) {
  const auto& f = fixture();
  BacktestConfig c = f.config;
  EXPECT_NO_THROW(validate_schedule(f.inputs, c));
  c.schedule = {MonthId::of(2012, 1), 0};
  EXPECT_THROW(validate_schedule(f.inputs, c), ConfigError);
  c = f.config;
  c.schemes.clear();
  EXPECT_THROW(validate_schedule(f.inputs, c), ConfigError);
  c = f.config;
  c.schedule = {MonthId::of(2012, 5), 2};  // second period runs past the data
  EXPECT_THROW(validate_schedule(f.inputs, c), WindowError);
  c = f.config;
  const int windows[] = {13};
  c.schemes = all_schemes(windows);
  EXPECT_THROW(validate_schedule(f.inputs, c), WindowError);
  EXPECT_THROW(run_backtest(f.inputs, c), WindowError);
}
