#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "volrank/calendar.hpp"
#include "volrank/panels.hpp"

namespace volrank {

enum class GarchStatus { converged, fallback_short_history, fallback_nonconvergence, fallback_other };

std::string_view to_string(GarchStatus status);

/// Constant-mean GARCH(1,1):
///   r_t = mu + e_t,  e_t ~ N(0, h_t),  h_t = omega + alpha e_{t-1}^2 + beta h_{t-1},
/// with h_1 set to the sample variance of the fitted series.
struct GarchFit {
  double mu = 0.0;
  double omega = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double initial_var = 0.0;
  /// h_T for the last observation, or the fallback variance.
  double latest_var = 0.0;
  double log_likelihood = 0.0;
  int iterations = 0;
  std::size_t observations = 0;
  GarchStatus status = GarchStatus::fallback_other;

  bool converged() const { return status == GarchStatus::converged; }
};

struct GarchOptions {
  std::size_t min_observations = 100;
  int max_iterations = 500;
  double gradient_tolerance = 1e-6;
  double persistence_cap = 0.999;  // alpha + beta <= cap
  /// Hold alpha = beta = 0 and estimate only mu and omega.
  bool constant_variance = false;
};

/// Gaussian quasi-maximum-likelihood fit by BFGS on transformed parameters
/// (log omega; logistic maps for alpha + beta and the alpha share). Missing
/// entries are dropped. Short histories, degenerate series and optimiser
/// failures produce a fallback status with latest_var = sample variance.
GarchFit fit_garch(std::span<const double> series, const GarchOptions& options = {});

/// Conditional variances h_1..h_n for the given parameters.
std::vector<double> garch_variance_path(std::span<const double> series, double mu, double omega,
                                        double alpha, double beta, double initial_var);

double garch_log_likelihood(std::span<const double> series, double mu, double omega,
                            double alpha, double beta, double initial_var);

struct GarchDiagonal {
  Eigen::VectorXd stdevs;
  std::vector<GarchFit> fits;
};

/// Fits every row of `history` (series x days, NaN dropped) and returns
/// sqrt(latest_var). Series whose fit falls back use `fallback_variances`
/// (the naive window estimate) instead.
GarchDiagonal garch_stdev_diagonal(const Eigen::MatrixXd& history,
                                   const Eigen::VectorXd& fallback_variances,
                                   const GarchOptions& options = {}, unsigned workers = 1);

/// Panel form: history is the `history_months` before `test_start`,
/// truncated at the calendar start.
GarchDiagonal garch_stdev_diagonal(const ReturnPanel& panel, MonthId test_start,
                                   int history_months, const Eigen::VectorXd& fallback_variances,
                                   const GarchOptions& options = {}, unsigned workers = 1);

}  // namespace volrank
