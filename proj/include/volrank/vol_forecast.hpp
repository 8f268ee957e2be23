#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "volrank/covariance.hpp"
#include "volrank/factor_model.hpp"
#include "volrank/garch.hpp"
#include "volrank/panels.hpp"
#include "volrank/portfolio.hpp"

namespace volrank {

enum class Approach { direct, factor };
enum class VarianceModel { naive, garch };

std::string_view to_string(Approach a);
std::string_view to_string(VarianceModel v);

struct SchemeId {
  Approach approach = Approach::direct;
  VarianceModel variance_model = VarianceModel::naive;
  int q = 1;  // window months

  /// e.g. "direct-garch-q6"
  std::string name() const;
  auto operator<=>(const SchemeId&) const = default;
};

/// Every approach x variance model combined with every window length.
std::vector<SchemeId> all_schemes(std::span<const int> windows);

struct ForecastOptions {
  int garch_history_months = 36;
  GarchOptions garch;
  NearestPdOptions repair;
  unsigned workers = 1;
};

/// Covariance matrices of one set of series for one test period, keyed by
/// (variance model, q). Correlations always come from the naive q-month
/// window; the diagonal comes from the same window (naive) or from GARCH
/// fits on the history before the period (garch).
struct SeriesCovariances {
  std::map<std::pair<VarianceModel, int>, Eigen::MatrixXd> cov;
  std::vector<GarchFit> garch_fits;  // empty unless a garch scheme was requested
  std::size_t repaired_windows = 0;
};

/// `series` is series x trading days over the whole calendar.
SeriesCovariances build_series_covariances(const Eigen::MatrixXd& series,
                                           const TradingCalendar& calendar, MonthId test_start,
                                           std::span<const SchemeId> schemes,
                                           const ForecastOptions& options);

/// Direct-return model for a set of companies, shared by all portfolios of
/// a period that draw from that set.
struct DirectModel {
  std::vector<std::size_t> companies;
  std::map<std::size_t, std::size_t> row_of;
  SeriesCovariances covariances;
};

DirectModel build_direct_model(const ReturnPanel& returns, MonthId test_start,
                               std::vector<std::size_t> companies,
                               std::span<const SchemeId> schemes, const ForecastOptions& options);

/// sqrt(w' Sigma w) for a direct scheme. Members must belong to the model.
double estimate(const DirectModel& model, const Portfolio& portfolio, const SchemeId& scheme);

/// Factor-model inputs for one period: factor covariances, residual
/// variances of every company and the loadings of the month before.
struct FactorModel {
  Eigen::MatrixXd loadings;  // companies x factors, missing entries as 0
  SeriesCovariances factor_covariances;
  std::map<int, Eigen::VectorXd> residual_variances;
};

FactorModel build_factor_model(const FactorReturns& factor_returns, const ResidualPanel& residuals,
                               const LoadingPanel& loadings, MonthId test_start,
                               std::span<const SchemeId> schemes, const ForecastOptions& options);

/// sqrt(L_P' Sigma_f L_P + sum_k w_k^2 sigma_k^2) for a factor scheme.
double estimate(const FactorModel& model, const Portfolio& portfolio, const SchemeId& scheme);

/// L_P = L w: portfolio factor exposures (length l) from companies x l loadings.
Eigen::VectorXd portfolio_loadings(const Eigen::MatrixXd& loadings, const Portfolio& portfolio);

/// Factor volatility through the l x l factor covariance.
double factor_volatility(const Eigen::VectorXd& portfolio_loading, const Eigen::MatrixXd& factor_cov,
                         const Eigen::VectorXd& weights, const Eigen::VectorXd& residual_var);

/// Same quantity through the p x p company covariance L' Sigma_f L.
double factor_volatility_expanded(const Eigen::MatrixXd& member_loadings,  // l x p
                                  const Eigen::MatrixXd& factor_cov,
                                  const Eigen::VectorXd& weights,
                                  const Eigen::VectorXd& residual_var);

/// Standalone direct estimate for one portfolio (model over its members).
double estimate_direct(const Portfolio& portfolio, const ReturnPanel& returns,
                       const SchemeId& scheme, MonthId test_start,
                       const ForecastOptions& options = {});

/// Standalone factor estimate for one portfolio.
double estimate_factor(const Portfolio& portfolio, const FactorReturns& factor_returns,
                       const ResidualPanel& residuals, const LoadingPanel& loadings,
                       const SchemeId& scheme, MonthId test_start,
                       const ForecastOptions& options = {});

/// sqrt of a quadratic form that must be non-negative up to rounding.
double checked_sqrt(double quadratic, double scale);

}  // namespace volrank
