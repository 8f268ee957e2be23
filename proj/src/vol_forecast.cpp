#include "volrank/vol_forecast.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "volrank/errors.hpp"

namespace volrank {

std::string_view to_string(Approach a) { return a == Approach::direct ? "direct" : "factor"; }
std::string_view to_string(VarianceModel v) { return v == VarianceModel::naive ? "naive" : "garch"; }

std::string SchemeId::name() const {
  return std::string(to_string(approach)) + "-" + std::string(to_string(variance_model)) + "-q" +
         std::to_string(q);
}

std::vector<SchemeId> all_schemes(std::span<const int> windows) {
  std::vector<SchemeId> out;
  for (Approach a : {Approach::direct, Approach::factor}) {
    for (VarianceModel v : {VarianceModel::naive, VarianceModel::garch}) {
      for (int q : windows) out.push_back({a, v, q});
    }
  }
  return out;
}

double checked_sqrt(double quadratic, double scale) {
  if (quadratic >= 0.0) return std::sqrt(quadratic);
  if (quadratic > -1e-10 * std::max(scale, 1e-300) || quadratic > -1e-300) return 0.0;
  throw ConsistencyError("negative portfolio variance " + std::to_string(quadratic) +
                         " after positive-definite repair");
}

SeriesCovariances build_series_covariances(const Eigen::MatrixXd& series,
                                           const TradingCalendar& calendar, MonthId test_start,
                                           std::span<const SchemeId> schemes,
                                           const ForecastOptions& options) {
  std::set<int> windows;
  bool need_garch = false;
  for (const auto& s : schemes) {
    windows.insert(s.q);
    need_garch = need_garch || s.variance_model == VarianceModel::garch;
  }

  SeriesCovariances out;
  std::map<int, CovEstimate> naive;
  for (int q : windows) {
    const DayRange r = calendar.window(test_start, q);
    CovEstimate est = pairwise_cov(
        series.middleCols(static_cast<Eigen::Index>(r.begin), static_cast<Eigen::Index>(r.size())));
    repair_in_place(est, options.repair);
    if (est.repaired) ++out.repaired_windows;
    naive.emplace(q, std::move(est));
  }

  if (need_garch) {
    const DayRange hist = calendar.clipped_window(test_start, options.garch_history_months);
    const Eigen::MatrixXd history =
        series.middleCols(static_cast<Eigen::Index>(hist.begin), static_cast<Eigen::Index>(hist.size()));
    // Fit once; the fallback variance depends on q and is applied per window.
    const Eigen::VectorXd no_fallback = Eigen::VectorXd::Zero(series.rows());
    GarchDiagonal diag = garch_stdev_diagonal(history, no_fallback, options.garch, options.workers);
    out.garch_fits = std::move(diag.fits);
  }

  for (const auto& s : schemes) {
    const auto key = std::make_pair(s.variance_model, s.q);
    if (out.cov.contains(key)) continue;
    const CovEstimate& est = naive.at(s.q);
    if (s.variance_model == VarianceModel::naive) {
      out.cov.emplace(key, est.cov);
      continue;
    }
    Eigen::VectorXd stdevs(series.rows());
    for (Eigen::Index i = 0; i < series.rows(); ++i) {
      const GarchFit& fit = out.garch_fits[static_cast<std::size_t>(i)];
      stdevs(i) = fit.converged() ? std::sqrt(fit.latest_var) : est.stdevs(i);
    }
    // A series with no observations in the q window has a zero correlation
    // row (unit diagonal only where the naive stdev is positive), so it adds
    // nothing even when GARCH gives it a variance.
    out.cov.emplace(key, recompose(stdevs, est.corr));
  }
  return out;
}

DirectModel build_direct_model(const ReturnPanel& returns, MonthId test_start,
                               std::vector<std::size_t> companies,
                               std::span<const SchemeId> schemes, const ForecastOptions& options) {
  std::sort(companies.begin(), companies.end());
  companies.erase(std::unique(companies.begin(), companies.end()), companies.end());
  DirectModel model;
  model.companies = std::move(companies);
  Eigen::MatrixXd series(static_cast<Eigen::Index>(model.companies.size()), returns.values.cols());
  for (std::size_t i = 0; i < model.companies.size(); ++i) {
    model.row_of.emplace(model.companies[i], i);
    series.row(static_cast<Eigen::Index>(i)) = returns.values.row(static_cast<Eigen::Index>(model.companies[i]));
  }
  std::vector<SchemeId> direct;
  for (const auto& s : schemes) {
    if (s.approach == Approach::direct) direct.push_back(s);
  }
  model.covariances = build_series_covariances(series, returns.calendar, test_start, direct, options);
  return model;
}

double estimate(const DirectModel& model, const Portfolio& portfolio, const SchemeId& scheme) {
  const Eigen::MatrixXd& cov = model.covariances.cov.at({scheme.variance_model, scheme.q});
  const auto p = static_cast<Eigen::Index>(portfolio.members.size());
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(p));
  Eigen::VectorXd w(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const auto& m = portfolio.members[static_cast<std::size_t>(i)];
    rows[static_cast<std::size_t>(i)] = static_cast<Eigen::Index>(model.row_of.at(m.company));
    w(i) = m.weight;
  }
  double quad = 0.0;
  double scale = 0.0;
  for (Eigen::Index a = 0; a < p; ++a) {
    double inner = 0.0;
    for (Eigen::Index b = 0; b < p; ++b) {
      inner += cov(rows[static_cast<std::size_t>(a)], rows[static_cast<std::size_t>(b)]) * w(b);
    }
    quad += w(a) * inner;
    scale += w(a) * w(a) * cov(rows[static_cast<std::size_t>(a)], rows[static_cast<std::size_t>(a)]);
  }
  return checked_sqrt(quad, scale);
}

FactorModel build_factor_model(const FactorReturns& factor_returns, const ResidualPanel& residuals,
                               const LoadingPanel& loadings, MonthId test_start,
                               std::span<const SchemeId> schemes, const ForecastOptions& options) {
  FactorModel model;
  model.loadings = loadings.at(test_start - 1);
  model.loadings = model.loadings.array().isNaN().select(0.0, model.loadings);

  std::vector<SchemeId> factor;
  std::set<int> windows;
  for (const auto& s : schemes) {
    if (s.approach != Approach::factor) continue;
    factor.push_back(s);
    windows.insert(s.q);
  }
  model.factor_covariances = build_series_covariances(factor_returns.values, factor_returns.calendar,
                                                      test_start, factor, options);
  for (int q : windows) model.residual_variances.emplace(q, residual_variances(residuals, test_start, q));
  return model;
}

Eigen::VectorXd portfolio_loadings(const Eigen::MatrixXd& loadings, const Portfolio& portfolio) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(loadings.cols());
  for (const auto& m : portfolio.members) {
    out += m.weight * loadings.row(static_cast<Eigen::Index>(m.company)).transpose();
  }
  return out;
}

double factor_volatility(const Eigen::VectorXd& portfolio_loading, const Eigen::MatrixXd& factor_cov,
                         const Eigen::VectorXd& weights, const Eigen::VectorXd& residual_var) {
  const double systematic = portfolio_loading.dot(factor_cov * portfolio_loading);
  const double idio = weights.cwiseAbs2().dot(residual_var);
  const double scale = portfolio_loading.cwiseAbs2().dot(factor_cov.diagonal().cwiseAbs()) + idio;
  return checked_sqrt(systematic + idio, scale);
}

double factor_volatility_expanded(const Eigen::MatrixXd& member_loadings,
                                  const Eigen::MatrixXd& factor_cov,
                                  const Eigen::VectorXd& weights,
                                  const Eigen::VectorXd& residual_var) {
  const Eigen::MatrixXd company_cov = member_loadings.transpose() * factor_cov * member_loadings;
  const double systematic = weights.dot(company_cov * weights);
  const double idio = weights.dot(residual_var.asDiagonal() * weights);
  const double scale = weights.cwiseAbs2().dot(company_cov.diagonal().cwiseAbs()) + idio;
  return checked_sqrt(systematic + idio, scale);
}

double estimate(const FactorModel& model, const Portfolio& portfolio, const SchemeId& scheme) {
  const Eigen::MatrixXd& cov = model.factor_covariances.cov.at({scheme.variance_model, scheme.q});
  const Eigen::VectorXd& resid = model.residual_variances.at(scheme.q);
  const auto p = static_cast<Eigen::Index>(portfolio.members.size());
  Eigen::VectorXd w(p);
  Eigen::VectorXd s2(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const auto& m = portfolio.members[static_cast<std::size_t>(i)];
    w(i) = m.weight;
    s2(i) = resid(static_cast<Eigen::Index>(m.company));
  }
  return factor_volatility(portfolio_loadings(model.loadings, portfolio), cov, w, s2);
}

double estimate_direct(const Portfolio& portfolio, const ReturnPanel& returns,
                       const SchemeId& scheme, MonthId test_start, const ForecastOptions& options) {
  if (scheme.approach != Approach::direct) throw std::invalid_argument("estimate_direct: not a direct scheme");
  std::vector<std::size_t> companies;
  for (const auto& m : portfolio.members) companies.push_back(m.company);
  const SchemeId schemes[] = {scheme};
  const DirectModel model = build_direct_model(returns, test_start, std::move(companies), schemes, options);
  return estimate(model, portfolio, scheme);
}

double estimate_factor(const Portfolio& portfolio, const FactorReturns& factor_returns,
                       const ResidualPanel& residuals, const LoadingPanel& loadings,
                       const SchemeId& scheme, MonthId test_start, const ForecastOptions& options) {
  if (scheme.approach != Approach::factor) throw std::invalid_argument("estimate_factor: not a factor scheme");
  const SchemeId schemes[] = {scheme};
  const FactorModel model =
      build_factor_model(factor_returns, residuals, loadings, test_start, schemes, options);
  return estimate(model, portfolio, scheme);
}

}  // namespace volrank
