#include "volrank/factor_model.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>

#include "volrank/covariance.hpp"
#include "volrank/csv.hpp"
#include "volrank/errors.hpp"
#include "volrank/parallel.hpp"

namespace volrank {

namespace {

constexpr double kRankTolerance = 1e-10;

[[noreturn]] void throw_singular(const Eigen::MatrixXd& design, const Eigen::MatrixXd& basis,
                                 std::span<const Factor> factors) {
  // The right singular vector of the smallest singular value, mapped back to
  // factor space, points at the columns causing the deficiency.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinV);
  Eigen::VectorXd null_dir = basis * svd.matrixV().col(svd.matrixV().cols() - 1);
  Eigen::Index worst = 0;
  null_dir.cwiseAbs().maxCoeff(&worst);
  if (static_cast<std::size_t>(worst) < factors.size()) {
    const auto& f = factors[static_cast<std::size_t>(worst)];
    throw SingularFitError(std::string(to_string(f.kind)), f.name);
  }
  throw SingularFitError("unnamed", "#" + std::to_string(worst));
}

}  // namespace

CrossSectionFit fit_cross_section(const Eigen::VectorXd& returns, const Eigen::MatrixXd& loadings,
                                  const Eigen::VectorXd& weights,
                                  const Eigen::MatrixXd& constraints,
                                  std::span<const Factor> factors) {
  const Eigen::Index n = returns.size();
  const Eigen::Index l = loadings.cols();
  const Eigen::Index c = constraints.rows();
  if (loadings.rows() != n || weights.size() != n) {
    throw std::invalid_argument("fit_cross_section: returns, loadings and weights disagree in size");
  }
  if (c > 0 && constraints.cols() != l) {
    throw std::invalid_argument("fit_cross_section: constraint matrix has wrong column count");
  }
  if ((weights.array() <= 0.0).any() || !weights.allFinite()) {
    throw std::invalid_argument("fit_cross_section: weights must be positive");
  }

  // Parameterise the feasible set {f : C f = 0} as f = N g.
  Eigen::MatrixXd basis;
  if (c == 0) {
    basis = Eigen::MatrixXd::Identity(l, l);
  } else {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> cqr(constraints.transpose());
    cqr.setThreshold(kRankTolerance);
    if (cqr.rank() != c) {
      throw std::invalid_argument("fit_cross_section: constraint matrix lacks full row rank");
    }
    const Eigen::MatrixXd q = cqr.householderQ();
    basis = q.rightCols(l - c);
  }
  if (n < basis.cols()) {
    throw SingularFitError("design", "fewer companies (" + std::to_string(n) +
                                         ") than free factor returns (" +
                                         std::to_string(basis.cols()) + ")");
  }

  const Eigen::VectorXd root_w = weights.cwiseSqrt();
  const Eigen::MatrixXd design = root_w.asDiagonal() * (loadings * basis);
  const Eigen::VectorXd rhs = root_w.cwiseProduct(returns);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < design.cols()) throw_singular(design, basis, factors);

  CrossSectionFit fit;
  fit.factor_returns = basis * qr.solve(rhs);
  fit.residuals = returns - loadings * fit.factor_returns;
  return fit;
}

Eigen::MatrixXd build_constraints(const Eigen::MatrixXd& loadings, const Eigen::VectorXd& caps,
                                  std::span<const Factor> factors, const FitConfig& config) {
  std::vector<Eigen::RowVectorXd> rows;
  const Eigen::RowVectorXd exposure = caps.transpose() * loadings;
  auto add_block = [&](FactorKind kind) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(loadings.cols());
    for (std::size_t j = 0; j < factors.size(); ++j) {
      if (factors[j].kind == kind) row(static_cast<Eigen::Index>(j)) = exposure(static_cast<Eigen::Index>(j));
    }
    const double total = row.sum();
    if (total != 0.0 && std::isfinite(total)) rows.push_back(row / total);
  };
  if (config.constrain_countries) add_block(FactorKind::country);
  if (config.constrain_industries) add_block(FactorKind::industry);

  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), loadings.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = rows[i];
  return out;
}

FactorModelFit fit_panel(const ReturnPanel& returns, const LoadingPanel& loadings,
                         const MarketCapSeries& mcaps, const UniverseMask& mask,
                         const FitConfig& config, unsigned workers) {
  const auto& calendar = returns.calendar;
  const std::size_t n_days = calendar.size();
  const std::size_t n_companies = returns.companies.size();
  const std::size_t l = loadings.factors.size();

  FactorModelFit out;
  out.factor_returns.factors = loadings.factors;
  out.factor_returns.calendar = calendar;
  out.factor_returns.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(l),
                                                    static_cast<Eigen::Index>(n_days));
  out.residuals.companies = returns.companies;
  out.residuals.calendar = calendar;
  out.residuals.values = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n_companies),
                                                   static_cast<Eigen::Index>(n_days), kMissing);

  // Style loadings are expected to be cap-centred within each month.
  const auto styles = loadings.indices_of(FactorKind::style);
  for (std::size_t m = 0; m < loadings.months.size(); ++m) {
    const MonthId month = loadings.first_month + static_cast<int>(m);
    const auto& mat = loadings.months[m];
    for (std::size_t s : styles) {
      double centred = 0.0;
      double scale = 0.0;
      for (std::size_t k = 0; k < n_companies; ++k) {
        if (!mask.at(k, month)) continue;
        const double x = mat(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(s));
        const double cap = mcaps.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m));
        if (is_missing(x) || is_missing(cap)) continue;
        centred += cap * x;
        scale += cap * std::abs(x);
      }
      if (scale > 0.0 && std::abs(centred) > 1e-6 * scale) {
        out.log.push_back("warning: " + loadings.factors[s].name + " is not cap-centred in " +
                          format_month(month));
      }
    }
  }

  std::vector<std::string> day_errors(n_days);
  std::vector<char> fitted(n_days, 0);

  parallel_for(n_days, workers, [&](std::size_t t) {
    const MonthId month = calendar.month_of_day(t);
    const auto m = static_cast<Eigen::Index>(month - loadings.first_month);
    const auto& mat = loadings.months[static_cast<std::size_t>(m)];

    std::vector<Eigen::Index> rows;
    for (std::size_t k = 0; k < n_companies; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      if (!mask.at(k, month) || !returns.observed(k, t)) continue;
      const double cap = mcaps.values(kk, m);
      if (is_missing(cap) || !(cap > 0.0)) continue;
      if (mat.row(kk).array().isNaN().any()) continue;
      rows.push_back(kk);
    }
    if (rows.empty()) {
      day_errors[t] = "no eligible companies";
      return;
    }

    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::VectorXd r(n);
    Eigen::VectorXd caps(n);
    Eigen::MatrixXd x_full(n, static_cast<Eigen::Index>(l));
    for (Eigen::Index i = 0; i < n; ++i) {
      r(i) = returns.values(rows[static_cast<std::size_t>(i)], static_cast<Eigen::Index>(t));
      caps(i) = mcaps.values(rows[static_cast<std::size_t>(i)], m);
      x_full.row(i) = mat.row(rows[static_cast<std::size_t>(i)]);
    }

    // Factors without exposure today keep a zero return.
    std::vector<Eigen::Index> active;
    std::vector<Factor> active_factors;
    for (std::size_t j = 0; j < l; ++j) {
      if ((x_full.col(static_cast<Eigen::Index>(j)).array() != 0.0).any()) {
        active.push_back(static_cast<Eigen::Index>(j));
        active_factors.push_back(loadings.factors[j]);
      }
    }
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(active.size()));
    for (std::size_t a = 0; a < active.size(); ++a) x.col(static_cast<Eigen::Index>(a)) = x_full.col(active[a]);

    Eigen::VectorXd w = config.weighting == RegressionWeighting::market_cap ? caps : caps.cwiseSqrt();
    w /= w.mean();
    const Eigen::MatrixXd constraints = build_constraints(x, caps, active_factors, config);

    try {
      const CrossSectionFit fit = fit_cross_section(r, x, w, constraints, active_factors);
      for (std::size_t a = 0; a < active.size(); ++a) {
        out.factor_returns.values(active[a], static_cast<Eigen::Index>(t)) =
            fit.factor_returns(static_cast<Eigen::Index>(a));
      }
      for (Eigen::Index i = 0; i < n; ++i) {
        out.residuals.values(rows[static_cast<std::size_t>(i)], static_cast<Eigen::Index>(t)) =
            fit.residuals(i);
      }
      fitted[t] = 1;
    } catch (const SingularFitError& e) {
      day_errors[t] = e.what();
    }
  });

  for (std::size_t t = 0; t < n_days; ++t) {
    if (fitted[t]) continue;
    out.unfitted_days.push_back(t);
    out.log.push_back(format_date(calendar.day(t)) + ": factor returns set to 0 (" +
                      day_errors[t] + ")");
  }
  return out;
}

Eigen::VectorXd residual_variances(const ResidualPanel& residuals, MonthId test_start, int q) {
  const DayRange r = residuals.calendar.window(test_start, q);
  const auto n = static_cast<Eigen::Index>(residuals.companies.size());
  Eigen::VectorXd out(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out(k) = sample_variance(residuals.values.row(k).segment(static_cast<Eigen::Index>(r.begin),
                                                             static_cast<Eigen::Index>(r.size())));
  }
  return out;
}

void write_factor_returns_csv(const std::string& path, const FactorReturns& f) {
  auto out = csv::open_out(path);
  out << "factor,date,value\n";
  for (std::size_t j = 0; j < f.factors.size(); ++j) {
    for (std::size_t t = 0; t < f.calendar.size(); ++t) {
      out << f.factors[j].name << ',' << format_date(f.calendar.day(t)) << ','
          << csv::format_double(f.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(t)))
          << '\n';
    }
  }
}

void write_residuals_csv(const std::string& path, const ResidualPanel& residuals) {
  auto out = csv::open_out(path);
  out << "company,date,value\n";
  for (std::size_t k = 0; k < residuals.companies.size(); ++k) {
    for (std::size_t t = 0; t < residuals.calendar.size(); ++t) {
      const double v = residuals.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t));
      if (is_missing(v)) continue;
      out << residuals.companies[k] << ',' << format_date(residuals.calendar.day(t)) << ','
          << csv::format_double(v) << '\n';
    }
  }
}

}  // namespace volrank
