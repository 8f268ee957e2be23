#include "volrank/covariance.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "volrank/errors.hpp"

namespace volrank {

double sample_variance(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  double sum = 0.0;
  Eigen::Index n = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!is_missing(x(i))) {
      sum += x(i);
      ++n;
    }
  }
  if (n < 2) return 0.0;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!is_missing(x(i))) ss += (x(i) - mean) * (x(i) - mean);
  }
  return ss / static_cast<double>(n - 1);
}

CovEstimate pairwise_cov(const Eigen::MatrixXd& window) {
  const Eigen::Index p = window.rows();
  const Eigen::Index t = window.cols();

  // Centre each series on its own mean first; covariances are shift
  // invariant and this keeps the product formula well conditioned.
  Eigen::MatrixXd observed = Eigen::MatrixXd::Zero(p, t);
  Eigen::MatrixXd centred = Eigen::MatrixXd::Zero(p, t);
  for (Eigen::Index i = 0; i < p; ++i) {
    double sum = 0.0;
    Eigen::Index n = 0;
    for (Eigen::Index d = 0; d < t; ++d) {
      if (!is_missing(window(i, d))) {
        sum += window(i, d);
        ++n;
      }
    }
    const double mean = n > 0 ? sum / static_cast<double>(n) : 0.0;
    for (Eigen::Index d = 0; d < t; ++d) {
      if (!is_missing(window(i, d))) {
        observed(i, d) = 1.0;
        centred(i, d) = window(i, d) - mean;
      }
    }
  }

  const Eigen::MatrixXd counts = observed * observed.transpose();
  const Eigen::MatrixXd sums = centred * observed.transpose();  // (i, j): sum of i over overlap
  const Eigen::MatrixXd cross = centred * centred.transpose();

  CovEstimate out;
  out.cov = Eigen::MatrixXd::Zero(p, p);
  out.estimable = BoolMatrix::Constant(p, p, false);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = j; i < p; ++i) {
      const double n = counts(i, j);
      if (n < 2.0) continue;
      const double c = (cross(i, j) - sums(i, j) * sums(j, i) / n) / (n - 1.0);
      out.cov(i, j) = c;
      out.cov(j, i) = c;
      out.estimable(i, j) = true;
      out.estimable(j, i) = true;
    }
  }
  for (Eigen::Index i = 0; i < p; ++i) out.cov(i, i) = std::max(out.cov(i, i), 0.0);

  Decomposition dec = decompose(out.cov);
  out.stdevs = std::move(dec.stdevs);
  out.corr = std::move(dec.corr);
  return out;
}

CovEstimate pairwise_cov(const ReturnPanel& window, std::span<const std::size_t> rows) {
  Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows.size()), window.values.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    sub.row(static_cast<Eigen::Index>(i)) = window.values.row(static_cast<Eigen::Index>(rows[i]));
  }
  return pairwise_cov(sub);
}

Decomposition decompose(const Eigen::MatrixXd& cov) {
  const Eigen::Index p = cov.rows();
  if (cov.cols() != p) throw std::invalid_argument("decompose: matrix is not square");
  Decomposition out;
  out.stdevs.resize(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    if (cov(i, i) < 0.0) {
      throw std::invalid_argument("decompose: negative variance at index " + std::to_string(i));
    }
    out.stdevs(i) = std::sqrt(cov(i, i));
  }
  out.corr = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = 0; i < p; ++i) {
      const double s = out.stdevs(i) * out.stdevs(j);
      if (s > 0.0) out.corr(i, j) = i == j ? 1.0 : cov(i, j) / s;
    }
  }
  return out;
}

Eigen::MatrixXd recompose(const Eigen::VectorXd& stdevs, const Eigen::MatrixXd& corr) {
  return stdevs.asDiagonal() * corr * stdevs.asDiagonal();
}

double min_eigenvalue(const Eigen::MatrixXd& symmetric) {
  if (symmetric.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetric, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

namespace {

Eigen::MatrixXd project_psd(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd out = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace

NearestPdResult nearest_pd(const Eigen::MatrixXd& symmetric, const NearestPdOptions& options) {
  if (symmetric.rows() != symmetric.cols()) {
    throw std::invalid_argument("nearest_pd: matrix is not square");
  }
  NearestPdResult out;
  // Cholesky of A + tol I succeeding already implies min eig > -tol.
  const Eigen::Index n = symmetric.rows();
  const Eigen::LLT<Eigen::MatrixXd> llt(symmetric + options.tol * Eigen::MatrixXd::Identity(n, n));
  if (n == 0 || llt.info() == Eigen::Success || min_eigenvalue(symmetric) >= -options.tol) {
    out.matrix = symmetric;
    return out;
  }
  out.repaired = true;

  if (!options.unit_diagonal) {
    out.matrix = project_psd(symmetric);
    out.iterations = 1;
    return out;
  }

  // Higham (2002) alternating projections with Dykstra's correction, written
  // as the fixed point r = g(r) = r + P_U(P_S(r)) - P_S(r) and accelerated
  // with Anderson mixing (Higham and Strabic, 2016). P_S(r) at the fixed
  // point is the nearest correlation matrix.
  const Eigen::Index p = symmetric.rows();
  const Eigen::Index len = p * p;
  constexpr int memory = 4;
  std::vector<Eigen::VectorXd> dx;
  std::vector<Eigen::VectorXd> df;
  Eigen::MatrixXd r = symmetric;
  Eigen::MatrixXd y = symmetric;
  Eigen::VectorXd prev_r;
  Eigen::VectorXd prev_f;
  double gap = 0.0;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const Eigen::MatrixXd x = project_psd(r);
    Eigen::MatrixXd next = x;
    next.diagonal().setOnes();
    const double change = (next - y).norm();
    y = next;
    if (change < options.convergence) {
      // Congruence scaling of the PSD iterate gives an exactly unit diagonal
      // while staying PSD; at convergence it differs from y by rounding only.
      const Eigen::VectorXd d = x.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
      Eigen::MatrixXd scaled = d.asDiagonal() * x * d.asDiagonal();
      scaled.diagonal().setOnes();
      gap = min_eigenvalue(scaled);
      if (gap >= -options.tol) {
        out.matrix = 0.5 * (scaled + scaled.transpose());
        out.iterations = it;
        return out;
      }
    }

    const Eigen::VectorXd rv = Eigen::Map<const Eigen::VectorXd>(r.data(), len);
    const Eigen::MatrixXd g = r + next - x;
    const Eigen::VectorXd gv = Eigen::Map<const Eigen::VectorXd>(g.data(), len);
    const Eigen::VectorXd f = gv - rv;
    if (prev_f.size() == len) {
      dx.push_back(rv - prev_r);
      df.push_back(f - prev_f);
      if (static_cast<int>(dx.size()) > memory) {
        dx.erase(dx.begin());
        df.erase(df.begin());
      }
    }
    prev_r = rv;
    prev_f = f;

    Eigen::VectorXd mixed = gv;
    if (!df.empty()) {
      Eigen::MatrixXd dfm(len, static_cast<Eigen::Index>(df.size()));
      Eigen::MatrixXd dxm(len, static_cast<Eigen::Index>(dx.size()));
      for (std::size_t i = 0; i < df.size(); ++i) {
        dfm.col(static_cast<Eigen::Index>(i)) = df[i];
        dxm.col(static_cast<Eigen::Index>(i)) = dx[i];
      }
      const Eigen::VectorXd gamma = dfm.colPivHouseholderQr().solve(f);
      if (gamma.allFinite()) {
        mixed = gv - (dxm + dfm) * gamma;
      } else {
        dx.clear();
        df.clear();
      }
    }
    r = Eigen::Map<const Eigen::MatrixXd>(mixed.data(), p, p);
    r = 0.5 * (r + r.transpose());
  }
  gap = min_eigenvalue(y);
  throw NearestPdError(options.max_iterations, gap);
}

void repair_in_place(CovEstimate& estimate, const NearestPdOptions& options) {
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < estimate.stdevs.size(); ++i) {
    if (estimate.stdevs(i) > 0.0) active.push_back(i);
  }
  const auto n = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd sub(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) sub(a, b) = estimate.corr(active[static_cast<std::size_t>(a)], active[static_cast<std::size_t>(b)]);
  }
  NearestPdResult fixed = nearest_pd(sub, options);
  if (!fixed.repaired) return;
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      estimate.corr(active[static_cast<std::size_t>(a)], active[static_cast<std::size_t>(b)]) = fixed.matrix(a, b);
    }
  }
  estimate.cov = recompose(estimate.stdevs, estimate.corr);
  estimate.repaired = true;
}

}  // namespace volrank
