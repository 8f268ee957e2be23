#include "volrank/garch.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "volrank/covariance.hpp"
#include "volrank/parallel.hpp"

namespace volrank {

std::string_view to_string(GarchStatus status) {
  switch (status) {
    case GarchStatus::converged: return "converged";
    case GarchStatus::fallback_short_history: return "fallback_short_history";
    case GarchStatus::fallback_nonconvergence: return "fallback_nonconvergence";
    case GarchStatus::fallback_other: return "fallback_other";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

struct Params {
  double mu;
  double omega;
  double alpha;
  double beta;
};

/// Maps unconstrained coordinates to the feasible region. In full mode the
/// coordinates are (mu, log omega, u, v) with alpha + beta = cap * s(u) and
/// alpha share s(v); in constant-variance mode (mu, log omega).
class ParamMap {
 public:
  ParamMap(double cap, bool constant) : cap_(cap), constant_(constant) {}

  Eigen::Index dim() const { return constant_ ? 2 : 4; }

  Params to_params(const Eigen::VectorXd& th) const {
    Params p{th(0), std::exp(th(1)), 0.0, 0.0};
    if (!constant_) {
      const double persistence = cap_ * logistic(th(2));
      const double share = logistic(th(3));
      p.alpha = persistence * share;
      p.beta = persistence * (1.0 - share);
    }
    return p;
  }

  Eigen::VectorXd from_params(const Params& p) const {
    Eigen::VectorXd th(dim());
    th(0) = p.mu;
    th(1) = std::log(p.omega);
    if (!constant_) {
      const double persistence = p.alpha + p.beta;
      th(2) = logit(persistence / cap_);
      th(3) = logit(p.alpha / persistence);
    }
    return th;
  }

  /// Chain rule from d/d(mu, omega, alpha, beta) to d/dth.
  Eigen::VectorXd pull_back(const Eigen::VectorXd& th, const Params& p,
                            const Eigen::Vector4d& natural) const {
    Eigen::VectorXd g(dim());
    g(0) = natural(0);
    g(1) = natural(1) * p.omega;
    if (!constant_) {
      const double su = logistic(th(2));
      const double sv = logistic(th(3));
      const double persistence = p.alpha + p.beta;
      g(2) = natural(2) * p.alpha * (1.0 - su) + natural(3) * p.beta * (1.0 - su);
      const double dshare = persistence * sv * (1.0 - sv);
      g(3) = (natural(2) - natural(3)) * dshare;
    }
    return g;
  }

 private:
  double cap_;
  bool constant_;
};

/// Mean negative log-likelihood and its gradient in natural parameters.
double mean_nll(const std::vector<double>& y, const Params& p, double h1, Eigen::Vector4d* grad) {
  const std::size_t n = y.size();
  double h = h1;
  double e_prev = 0.0;
  double h_prev = 0.0;
  Eigen::Vector4d dh = Eigen::Vector4d::Zero();
  Eigen::Vector4d acc = Eigen::Vector4d::Zero();
  double total = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) {
      h = p.omega + p.alpha * e_prev * e_prev + p.beta * h_prev;
      dh = Eigen::Vector4d(-2.0 * p.alpha * e_prev, 1.0, e_prev * e_prev, h_prev) + p.beta * dh;
    }
    if (!(h > 0.0) || !std::isfinite(h)) return kInf;
    const double e = y[t] - p.mu;
    total += 0.5 * (kLog2Pi + std::log(h) + e * e / h);
    if (grad) {
      const double dl_dh = 0.5 * (1.0 / h - e * e / (h * h));
      acc += dl_dh * dh;
      acc(0) += -e / h;
    }
    e_prev = e;
    h_prev = h;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  if (grad) *grad = acc * inv_n;
  return std::isfinite(total) ? total * inv_n : kInf;
}

struct BfgsResult {
  Eigen::VectorXd x;
  double value = kInf;
  int iterations = 0;
  bool converged = false;
};

template <class Objective>
BfgsResult minimise_bfgs(Objective&& objective, Eigen::VectorXd x, int max_iterations,
                         double gradient_tolerance) {
  const Eigen::Index d = x.size();
  Eigen::VectorXd g(d);
  double f = objective(x, g);
  BfgsResult out;
  if (!std::isfinite(f)) return out;

  Eigen::MatrixXd inv_h = Eigen::MatrixXd::Identity(d, d);
  bool fresh = true;
  for (int it = 0; it < max_iterations; ++it) {
    out.iterations = it;
    if (g.norm() < gradient_tolerance) {
      out.converged = true;
      break;
    }
    Eigen::VectorXd dir = -inv_h * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      inv_h.setIdentity();
      fresh = true;
      dir = -g;
      slope = -g.squaredNorm();
    }

    double step = 1.0;
    Eigen::VectorXd x_new(d);
    Eigen::VectorXd g_new(d);
    double f_new = kInf;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      x_new = x + step * dir;
      f_new = objective(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (fresh) break;
      inv_h.setIdentity();
      fresh = true;
      continue;
    }

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-14) {
      if (fresh) inv_h *= sy / yv.squaredNorm();
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd left = Eigen::MatrixXd::Identity(d, d) - rho * s * yv.transpose();
      inv_h = left * inv_h * left.transpose() + rho * s * s.transpose();
      fresh = false;
    }
    x = x_new;
    g = g_new;
    f = f_new;
    out.iterations = it + 1;
  }
  if (!out.converged && g.norm() < gradient_tolerance) out.converged = true;
  out.x = x;
  out.value = f;
  return out;
}

GarchFit fallback(const std::vector<double>& r, GarchStatus status) {
  GarchFit fit;
  fit.status = status;
  fit.observations = r.size();
  Eigen::RowVectorXd row = Eigen::Map<const Eigen::RowVectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
  const bool constant = !r.empty() && row.minCoeff() == row.maxCoeff();
  fit.latest_var = constant ? 0.0 : sample_variance(row);
  fit.initial_var = fit.latest_var;
  if (!r.empty()) fit.mu = row.mean();
  fit.omega = fit.latest_var;
  return fit;
}

}  // namespace

std::vector<double> garch_variance_path(std::span<const double> series, double mu, double omega,
                                        double alpha, double beta, double initial_var) {
  std::vector<double> h(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    if (t == 0) {
      h[t] = initial_var;
    } else {
      const double e = series[t - 1] - mu;
      h[t] = omega + alpha * e * e + beta * h[t - 1];
    }
  }
  return h;
}

double garch_log_likelihood(std::span<const double> series, double mu, double omega,
                            double alpha, double beta, double initial_var) {
  const auto h = garch_variance_path(series, mu, omega, alpha, beta, initial_var);
  double ll = 0.0;
  for (std::size_t t = 0; t < series.size(); ++t) {
    if (!(h[t] > 0.0)) return -kInf;
    const double e = series[t] - mu;
    ll -= 0.5 * (kLog2Pi + std::log(h[t]) + e * e / h[t]);
  }
  return ll;
}

GarchFit fit_garch(std::span<const double> series, const GarchOptions& options) {
  std::vector<double> r;
  r.reserve(series.size());
  for (double v : series) {
    if (!is_missing(v)) r.push_back(v);
  }
  if (r.size() < std::max<std::size_t>(options.min_observations, 2)) {
    return fallback(r, GarchStatus::fallback_short_history);
  }
  for (double v : r) {
    if (!std::isfinite(v)) return fallback({}, GarchStatus::fallback_other);
  }

  GarchFit base = fallback(r, GarchStatus::fallback_other);
  const double var = base.latest_var;
  if (!(var > 0.0) || !std::isfinite(var)) return base;

  // Fit on the unit-variance series; the model is scale equivariant.
  const double scale = std::sqrt(var);
  std::vector<double> y(r.size());
  for (std::size_t t = 0; t < r.size(); ++t) y[t] = r[t] / scale;
  const double y_mean = base.mu / scale;

  const ParamMap map(options.persistence_cap, options.constant_variance);
  Params start{y_mean, 1.0, 0.0, 0.0};
  if (!options.constant_variance) start = {y_mean, 0.05, 0.05, 0.90};

  auto objective = [&](const Eigen::VectorXd& th, Eigen::VectorXd& grad) {
    const Params p = map.to_params(th);
    Eigen::Vector4d natural;
    const double f = mean_nll(y, p, 1.0, &natural);
    if (std::isfinite(f)) grad = map.pull_back(th, p, natural);
    return f;
  };
  const BfgsResult opt =
      minimise_bfgs(objective, map.from_params(start), options.max_iterations, options.gradient_tolerance);
  if (!std::isfinite(opt.value)) return base;
  if (!opt.converged) {
    GarchFit fit = base;
    fit.status = GarchStatus::fallback_nonconvergence;
    fit.iterations = opt.iterations;
    return fit;
  }

  const Params p = map.to_params(opt.x);
  GarchFit fit;
  fit.mu = p.mu * scale;
  fit.omega = p.omega * var;
  fit.alpha = p.alpha;
  fit.beta = p.beta;
  fit.initial_var = var;
  fit.iterations = opt.iterations;
  fit.observations = r.size();
  fit.status = GarchStatus::converged;
  fit.log_likelihood = garch_log_likelihood(r, fit.mu, fit.omega, fit.alpha, fit.beta, var);

  // The boundary point alpha = beta = 0 is feasible but not reachable by the
  // transformed parameters; keep it if it scores at least as well.
  const double naive_ll = garch_log_likelihood(r, base.mu, var, 0.0, 0.0, var);
  if (!options.constant_variance && naive_ll > fit.log_likelihood) {
    fit.mu = base.mu;
    fit.omega = var;
    fit.alpha = 0.0;
    fit.beta = 0.0;
    fit.log_likelihood = naive_ll;
  }
  if (!std::isfinite(fit.log_likelihood)) return base;

  fit.latest_var = garch_variance_path(r, fit.mu, fit.omega, fit.alpha, fit.beta, var).back();
  if (!(fit.latest_var > 0.0) || !std::isfinite(fit.latest_var)) return base;
  return fit;
}

GarchDiagonal garch_stdev_diagonal(const Eigen::MatrixXd& history,
                                   const Eigen::VectorXd& fallback_variances,
                                   const GarchOptions& options, unsigned workers) {
  const Eigen::Index n = history.rows();
  GarchDiagonal out;
  out.stdevs = Eigen::VectorXd::Zero(n);
  out.fits.resize(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t i) {
    const auto row = static_cast<Eigen::Index>(i);
    std::vector<double> series(static_cast<std::size_t>(history.cols()));
    for (Eigen::Index t = 0; t < history.cols(); ++t) series[static_cast<std::size_t>(t)] = history(row, t);
    GarchFit fit = fit_garch(series, options);
    if (!fit.converged()) fit.latest_var = std::max(fallback_variances(row), 0.0);
    out.stdevs(row) = std::sqrt(fit.latest_var);
    out.fits[i] = fit;
  });
  return out;
}

GarchDiagonal garch_stdev_diagonal(const ReturnPanel& panel, MonthId test_start,
                                   int history_months, const Eigen::VectorXd& fallback_variances,
                                   const GarchOptions& options, unsigned workers) {
  const DayRange r = panel.calendar.clipped_window(test_start, history_months);
  return garch_stdev_diagonal(
      panel.values.middleCols(static_cast<Eigen::Index>(r.begin), static_cast<Eigen::Index>(r.size())),
      fallback_variances, options, workers);
}

}  // namespace volrank
