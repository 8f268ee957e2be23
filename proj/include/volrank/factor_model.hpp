#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "volrank/calendar.hpp"
#include "volrank/panels.hpp"

namespace volrank {

enum class RegressionWeighting { market_cap, sqrt_market_cap };

struct FitConfig {
  RegressionWeighting weighting = RegressionWeighting::market_cap;
  /// Cap-weighted country factor returns sum to zero.
  bool constrain_countries = true;
  /// Cap-weighted industry factor returns sum to zero.
  bool constrain_industries = true;
};

/// Factors x trading days. Days that could not be fitted hold 0.
struct FactorReturns {
  std::vector<Factor> factors;
  TradingCalendar calendar;
  Eigen::MatrixXd values;
};

/// Companies x trading days of residuals, NaN where not fitted.
using ResidualPanel = ReturnPanel;

struct CrossSectionFit {
  Eigen::VectorXd factor_returns;
  Eigen::VectorXd residuals;
};

/// Constrained weighted least squares for one day:
///   minimise sum_k w_k (r_k - X_k' f)^2  subject to  C f = 0.
/// `loadings` is n x l, `constraints` is c x l (may have zero rows).
/// Throws std::invalid_argument on bad shapes, non-positive weights or a
/// constraint matrix without full row rank, and SingularFitError when the
/// design is rank deficient on the constraint null space. `factors`, when
/// given, is used to name the offending block in the error.
CrossSectionFit fit_cross_section(const Eigen::VectorXd& returns, const Eigen::MatrixXd& loadings,
                                  const Eigen::VectorXd& weights,
                                  const Eigen::MatrixXd& constraints,
                                  std::span<const Factor> factors = {});

/// One row per constrained block with non-zero exposure: coefficients
/// proportional to the block's cap-weighted total exposure, normalised to
/// sum to one.
Eigen::MatrixXd build_constraints(const Eigen::MatrixXd& loadings, const Eigen::VectorXd& caps,
                                  std::span<const Factor> factors, const FitConfig& config);

struct FactorModelFit {
  FactorReturns factor_returns;
  ResidualPanel residuals;
  std::vector<std::size_t> unfitted_days;
  /// Per-day fit failures and style-centering warnings.
  std::vector<std::string> log;
};

/// Fits every trading day over companies that are eligible that month, have
/// an observed return, a positive cap and no missing loading. Factors with
/// no exposure on a day get a zero return; days that cannot be fitted get
/// zero factor returns and missing residuals.
FactorModelFit fit_panel(const ReturnPanel& returns, const LoadingPanel& loadings,
                         const MarketCapSeries& mcaps, const UniverseMask& mask,
                         const FitConfig& config, unsigned workers = 1);

/// Per-company sample variance of the residuals in the `q` months before
/// `test_start`; companies with fewer than two residuals get 0.
Eigen::VectorXd residual_variances(const ResidualPanel& residuals, MonthId test_start, int q);

void write_factor_returns_csv(const std::string& path, const FactorReturns& f);
void write_residuals_csv(const std::string& path, const ResidualPanel& residuals);

}  // namespace volrank
