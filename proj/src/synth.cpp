#include "volrank/synth.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>

#include "volrank/errors.hpp"
#include "volrank/factor_model.hpp"
#include "volrank/panel_io.hpp"
#include "volrank/random.hpp"

namespace volrank {

namespace {

enum Stream : std::uint64_t { caps_stream = 1, loadings_stream, factors_stream, residuals_stream, missing_stream, regimes_stream };

std::string numbered(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%02d", prefix, i);
  return buf;
}

TradingCalendar business_days(const Date& start, int n) {
  std::vector<Date> days;
  days.reserve(static_cast<std::size_t>(n));
  std::chrono::sys_days d{start};
  while (static_cast<int>(days.size()) < n) {
    const std::chrono::weekday wd{d};
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) days.emplace_back(d);
    d += std::chrono::days{1};
  }
  return TradingCalendar(std::move(days));
}

}  // namespace

void SynthConfig::validate() const {
  if (n_companies < 1 || n_styles < 1 || n_countries < 1 || n_industries < 1 || n_days < 1) {
    throw ConfigError("synth: all counts must be positive");
  }
  if (n_countries > static_cast<int>(synth_countries(-1).size())) {
    throw ConfigError("synth: at most " + std::to_string(synth_countries(-1).size()) + " countries");
  }
  if (!(missing_rate >= 0.0 && missing_rate < 1.0)) throw ConfigError("synth: missing_rate must be in [0, 1)");
  if (!(factor_correlation >= 0.0 && factor_correlation < 1.0)) {
    throw ConfigError("synth: factor_correlation must be in [0, 1)");
  }
  if (residual_vol_min < 0.0 || residual_vol_max < residual_vol_min) {
    throw ConfigError("synth: need 0 <= residual_vol_min <= residual_vol_max");
  }
  if (random_regime_days < 0 || random_regime_spread < 1.0) {
    throw ConfigError("synth: random_regime_days >= 0 and random_regime_spread >= 1 required");
  }
  const std::size_t l = 1 + static_cast<std::size_t>(n_styles + n_countries + n_industries);
  if (garch.size() > 1 && garch.size() != l) {
    throw ConfigError("synth: garch needs 0, 1 or " + std::to_string(l) + " entries");
  }
  for (const auto& g : garch) {
    if (g.omega <= 0.0 || g.alpha < 0.0 || g.beta < 0.0 || g.alpha + g.beta >= 1.0) {
      throw ConfigError("synth: garch needs omega > 0, alpha, beta >= 0, alpha + beta < 1");
    }
  }
  parse_date(start_date);
}

Eigen::MatrixXd SynthTruth::base_factor_covariance() const {
  return base_factor_vols.asDiagonal() * factor_correlation * base_factor_vols.asDiagonal();
}

std::vector<std::string> synth_countries(int n) {
  static const std::vector<std::string> order = {
      "US", "JP", "GB", "CA", "DE", "BR", "IT", "SG", "IN", "IL", "CN", "FR", "SE", "KR",
      "MX", "ES", "TH", "TR", "HK", "NL", "NO", "TW", "CL", "MY", "DK", "CH", "FI"};
  if (n < 0 || n >= static_cast<int>(order.size())) return order;
  return {order.begin(), order.begin() + n};
}

SynthData generate(const SynthConfig& config) {
  config.validate();
  SynthData out;
  const TradingCalendar calendar = business_days(parse_date(config.start_date), config.n_days);
  const auto n = static_cast<Eigen::Index>(config.n_companies);
  const auto days = static_cast<Eigen::Index>(calendar.size());
  const auto months = static_cast<Eigen::Index>(calendar.month_count());

  std::vector<Factor> factors{{"market", FactorKind::market}};
  for (int i = 1; i <= config.n_styles; ++i) factors.push_back({numbered("style/s", i), FactorKind::style});
  for (const auto& c : synth_countries(config.n_countries)) factors.push_back({"country/" + c, FactorKind::country});
  for (int i = 1; i <= config.n_industries; ++i) {
    factors.push_back({numbered("industry/i", i), FactorKind::industry});
  }
  const auto l = static_cast<Eigen::Index>(factors.size());

  std::vector<std::string> companies;
  for (int k = 1; k <= config.n_companies; ++k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "C%05d", k);
    companies.emplace_back(buf);
  }

  std::normal_distribution<double> normal(0.0, 1.0);

  // Market caps: log-normal level, monthly log random walk.
  MarketCapSeries& mcaps = out.panels.mcaps;
  mcaps.companies = companies;
  mcaps.first_month = calendar.first_month();
  mcaps.values.resize(n, months);
  mcaps.proxied = BoolMatrix::Constant(n, months, false);
  {
    std::mt19937_64 rng(derive_seed(config.seed, {caps_stream}));
    for (Eigen::Index k = 0; k < n; ++k) {
      double log_cap = std::log(config.cap_median) + config.cap_log_sigma * normal(rng);
      for (Eigen::Index m = 0; m < months; ++m) {
        if (m > 0) log_cap += config.cap_drift * normal(rng);
        mcaps.values(k, m) = std::exp(log_cap);
      }
    }
  }

  // Loadings: market 1, one-hot country and industry, cap-centred styles.
  LoadingPanel& loadings = out.panels.loadings;
  loadings.factors = factors;
  loadings.companies = companies;
  loadings.first_month = calendar.first_month();
  {
    std::mt19937_64 rng(derive_seed(config.seed, {loadings_stream}));
    std::uniform_int_distribution<int> country(0, config.n_countries - 1);
    std::uniform_int_distribution<int> industry(0, config.n_industries - 1);
    std::vector<int> country_of(static_cast<std::size_t>(n));
    std::vector<int> industry_of(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) {
      country_of[static_cast<std::size_t>(k)] = country(rng);
      industry_of[static_cast<std::size_t>(k)] = industry(rng);
    }
    Eigen::MatrixXd raw_styles(n, config.n_styles);
    for (Eigen::Index k = 0; k < n; ++k) {
      for (int s = 0; s < config.n_styles; ++s) raw_styles(k, s) = normal(rng);
    }
    for (Eigen::Index m = 0; m < months; ++m) {
      if (m > 0 && config.loading_drift > 0.0) {
        for (Eigen::Index k = 0; k < n; ++k) {
          for (int s = 0; s < config.n_styles; ++s) raw_styles(k, s) += config.loading_drift * normal(rng);
        }
      }
      const Eigen::VectorXd mc = mcaps.values.col(m);
      Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, l);
      x.col(0).setOnes();
      for (int s = 0; s < config.n_styles; ++s) {
        const Eigen::VectorXd z = raw_styles.col(s);
        x.col(1 + s) = z.array() - mc.dot(z) / mc.sum();
      }
      for (Eigen::Index k = 0; k < n; ++k) {
        x(k, 1 + config.n_styles + country_of[static_cast<std::size_t>(k)]) = 1.0;
        x(k, 1 + config.n_styles + config.n_countries + industry_of[static_cast<std::size_t>(k)]) = 1.0;
      }
      loadings.months.push_back(std::move(x));
    }
  }

  // Factor returns.
  SynthTruth& truth = out.truth;
  truth.factors = factors;
  truth.base_factor_vols.resize(l);
  for (Eigen::Index j = 0; j < l; ++j) {
    switch (factors[static_cast<std::size_t>(j)].kind) {
      case FactorKind::market: truth.base_factor_vols(j) = config.market_vol; break;
      case FactorKind::style: truth.base_factor_vols(j) = config.style_vol; break;
      case FactorKind::country: truth.base_factor_vols(j) = config.country_vol; break;
      case FactorKind::industry: truth.base_factor_vols(j) = config.industry_vol; break;
    }
  }
  truth.factor_correlation = Eigen::MatrixXd::Constant(l, l, config.factor_correlation);
  truth.factor_correlation.diagonal().setOnes();

  Eigen::MatrixXd scale = Eigen::MatrixXd::Ones(l, days);
  if (config.random_regime_days > 0) {
    std::mt19937_64 rng(derive_seed(config.seed, {regimes_stream}));
    const double log_spread = std::log(config.random_regime_spread);
    std::uniform_real_distribution<double> u(-log_spread, log_spread);
    for (Eigen::Index j = 0; j < l; ++j) {
      double s = 1.0;
      for (Eigen::Index t = 0; t < days; ++t) {
        if (t % config.random_regime_days == 0) s = std::exp(u(rng));
        scale(j, t) = s;
      }
    }
  }
  for (const auto& regime : config.factor_vol_regimes) {
    for (Eigen::Index j = 0; j < l; ++j) {
      if (!regime.factor.empty() && regime.factor != factors[static_cast<std::size_t>(j)].name) continue;
      for (Eigen::Index t = std::max<Eigen::Index>(regime.start_day, 0); t < days; ++t) scale(j, t) = regime.scale;
    }
  }

  truth.factor_returns.resize(l, days);
  truth.factor_variances.resize(l, days);
  {
    std::mt19937_64 rng(derive_seed(config.seed, {factors_stream}));
    const double rho = config.factor_correlation;
    std::vector<double> h(static_cast<std::size_t>(l));
    std::vector<double> u_prev(static_cast<std::size_t>(l), 0.0);
    auto garch_of = [&](Eigen::Index j) -> const SynthGarch* {
      if (config.garch.empty()) return nullptr;
      return config.garch.size() == 1 ? &config.garch[0] : &config.garch[static_cast<std::size_t>(j)];
    };
    for (Eigen::Index j = 0; j < l; ++j) {
      const SynthGarch* g = garch_of(j);
      h[static_cast<std::size_t>(j)] = g ? g->omega / (1.0 - g->alpha - g->beta) : 1.0;
    }
    for (Eigen::Index t = 0; t < days; ++t) {
      const double common = normal(rng);
      for (Eigen::Index j = 0; j < l; ++j) {
        const auto js = static_cast<std::size_t>(j);
        const SynthGarch* g = garch_of(j);
        if (g && t > 0) h[js] = g->omega + g->alpha * u_prev[js] * u_prev[js] + g->beta * h[js];
        const double z = std::sqrt(rho) * common + std::sqrt(1.0 - rho) * normal(rng);
        const double u = std::sqrt(h[js]) * z;
        u_prev[js] = u;
        const double vol = truth.base_factor_vols(j) * scale(j, t);
        truth.factor_returns(j, t) = vol * u;
        truth.factor_variances(j, t) = vol * vol * h[js];
      }
    }
  }

  // Returns.
  truth.residual_vols.resize(n);
  ReturnPanel& returns = out.panels.returns;
  returns.companies = companies;
  returns.calendar = calendar;
  returns.values.resize(n, days);
  {
    std::mt19937_64 rng(derive_seed(config.seed, {residuals_stream}));
    std::uniform_real_distribution<double> vol(config.residual_vol_min, config.residual_vol_max);
    for (Eigen::Index k = 0; k < n; ++k) truth.residual_vols(k) = vol(rng);
    for (Eigen::Index t = 0; t < days; ++t) {
      const Eigen::MatrixXd& x = loadings.at(calendar.month_of_day(static_cast<std::size_t>(t)));
      returns.values.col(t) = x * truth.factor_returns.col(t);
      if (config.residual_vol_max > 0.0) {
        for (Eigen::Index k = 0; k < n; ++k) returns.values(k, t) += truth.residual_vols(k) * normal(rng);
      }
    }
  }
  if (config.missing_rate > 0.0) {
    std::mt19937_64 rng(derive_seed(config.seed, {missing_stream}));
    std::bernoulli_distribution missing(config.missing_rate);
    for (Eigen::Index t = 0; t < days; ++t) {
      for (Eigen::Index k = 0; k < n; ++k) {
        if (missing(rng)) returns.values(k, t) = kMissing;
      }
    }
  }
  return out;
}

void write_synth(const std::string& dir, const SynthData& data) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  write_returns_csv((base / "returns.csv").string(), data.panels.returns);
  write_loadings_csv((base / "loadings.csv").string(), data.panels.loadings);
  write_mcaps_csv((base / "mcaps.csv").string(), data.panels.mcaps);
  RegionMap::standard().write_csv((base / "regions.csv").string());
  FactorReturns f{data.truth.factors, data.panels.returns.calendar, data.truth.factor_returns};
  write_factor_returns_csv((base / "truth_factor_returns.csv").string(), f);
}

}  // namespace volrank
