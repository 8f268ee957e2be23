#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>

#include "volrank/panels.hpp"

namespace volrank {

/// Sample variance (n - 1 denominator) over the non-missing entries;
/// 0 when fewer than two are present.
double sample_variance(const Eigen::Ref<const Eigen::RowVectorXd>& x);

/// Pairwise covariance estimate in D R D form.
struct CovEstimate {
  Eigen::MatrixXd cov;
  Eigen::MatrixXd corr;
  Eigen::VectorXd stdevs;
  BoolMatrix estimable;  // at least two common observations
  bool repaired = false;
};

/// Covariance of the rows of `window` (series x days, NaN = missing). Each
/// pair uses only the days on which both series are observed, with its own
/// overlap means and an (overlap - 1) denominator. Pairs with fewer than two
/// common days get 0 and are marked non-estimable.
CovEstimate pairwise_cov(const Eigen::MatrixXd& window);

/// Same, restricted to the given rows of a return panel.
CovEstimate pairwise_cov(const ReturnPanel& window, std::span<const std::size_t> rows);

struct Decomposition {
  Eigen::VectorXd stdevs;
  Eigen::MatrixXd corr;
};

/// stdevs = sqrt(diag(cov)), corr = cov / (s_i s_j) with unit diagonal for
/// s_i > 0 and 0 wherever s_i s_j = 0. Throws std::invalid_argument on a
/// negative diagonal entry.
Decomposition decompose(const Eigen::MatrixXd& cov);

Eigen::MatrixXd recompose(const Eigen::VectorXd& stdevs, const Eigen::MatrixXd& corr);

double min_eigenvalue(const Eigen::MatrixXd& symmetric);

struct NearestPdOptions {
  bool unit_diagonal = true;
  double tol = 1e-8;
  int max_iterations = 200;
  double convergence = 1e-10;  // Frobenius change between iterates
};

struct NearestPdResult {
  Eigen::MatrixXd matrix;
  bool repaired = false;
  int iterations = 0;
};

/// Nearest positive semidefinite matrix in Frobenius norm; in unit-diagonal
/// mode the nearest correlation matrix, computed by alternating projections
/// with Dykstra's correction. Matrices whose smallest eigenvalue is already
/// >= -tol are returned unchanged. Throws NearestPdError if the iteration
/// does not converge.
NearestPdResult nearest_pd(const Eigen::MatrixXd& symmetric, const NearestPdOptions& options = {});

/// Repairs the correlation part of `estimate` if it is not positive
/// semidefinite (series with zero stdev are left out of the repair) and
/// refreshes `cov` and `repaired`.
void repair_in_place(CovEstimate& estimate, const NearestPdOptions& options = {});

}  // namespace volrank
