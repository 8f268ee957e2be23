#include "volrank/config.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "volrank/errors.hpp"

namespace volrank {

using nlohmann::ordered_json;

namespace {

/// Reads keys of one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const ordered_json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(where(key) + " has the wrong type");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  Section sub(const char* key) {
    seen_.insert(key);
    return Section(j_.at(key), where(key));
  }

  const ordered_json& raw(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.contains(k)) throw ConfigError("unknown config key " + where(k.c_str()));
    }
  }

  std::string where(const char* key = nullptr) const {
    std::string p = path_.empty() ? "" : path_;
    if (key) p += (p.empty() ? "" : ".") + std::string(key);
    return "'" + (p.empty() ? std::string("<root>") : p) + "'";
  }

 private:
  const ordered_json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

ordered_json parse_text(const std::string& text) {
  try {
    return ordered_json::parse(text, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

SynthConfig read_synth(Section s) {
  SynthConfig c;
  s.get("n_companies", c.n_companies);
  s.get("n_styles", c.n_styles);
  s.get("n_countries", c.n_countries);
  s.get("n_industries", c.n_industries);
  s.get("n_days", c.n_days);
  s.get("seed", c.seed);
  s.get("start_date", c.start_date);
  s.get("market_vol", c.market_vol);
  s.get("style_vol", c.style_vol);
  s.get("country_vol", c.country_vol);
  s.get("industry_vol", c.industry_vol);
  s.get("factor_correlation", c.factor_correlation);
  if (s.has("factor_vol_regimes")) {
    const ordered_json& arr = s.raw("factor_vol_regimes");
    if (!arr.is_array()) throw ConfigError("'synth.factor_vol_regimes' must be an array");
    for (const auto& item : arr) {
      Section r(item, "synth.factor_vol_regimes[]");
      FactorVolRegime regime;
      r.get("factor", regime.factor);
      r.get("start_day", regime.start_day);
      r.get("scale", regime.scale);
      r.finish();
      c.factor_vol_regimes.push_back(regime);
    }
  }
  s.get("random_regime_days", c.random_regime_days);
  s.get("random_regime_spread", c.random_regime_spread);
  if (s.has("garch")) {
    const ordered_json& arr = s.raw("garch");
    if (!arr.is_array()) throw ConfigError("'synth.garch' must be an array");
    for (const auto& item : arr) {
      Section g(item, "synth.garch[]");
      SynthGarch p;
      g.get("omega", p.omega);
      g.get("alpha", p.alpha);
      g.get("beta", p.beta);
      g.finish();
      c.garch.push_back(p);
    }
  }
  s.get("residual_vol_min", c.residual_vol_min);
  s.get("residual_vol_max", c.residual_vol_max);
  s.get("missing_rate", c.missing_rate);
  s.get("cap_median", c.cap_median);
  s.get("cap_log_sigma", c.cap_log_sigma);
  s.get("cap_drift", c.cap_drift);
  s.get("loading_drift", c.loading_drift);
  s.finish();
  c.validate();
  return c;
}

ordered_json write_synth(const SynthConfig& c) {
  ordered_json j;
  j["n_companies"] = c.n_companies;
  j["n_styles"] = c.n_styles;
  j["n_countries"] = c.n_countries;
  j["n_industries"] = c.n_industries;
  j["n_days"] = c.n_days;
  j["seed"] = c.seed;
  j["start_date"] = c.start_date;
  j["market_vol"] = c.market_vol;
  j["style_vol"] = c.style_vol;
  j["country_vol"] = c.country_vol;
  j["industry_vol"] = c.industry_vol;
  j["factor_correlation"] = c.factor_correlation;
  j["factor_vol_regimes"] = ordered_json::array();
  for (const auto& r : c.factor_vol_regimes) {
    j["factor_vol_regimes"].push_back({{"factor", r.factor}, {"start_day", r.start_day}, {"scale", r.scale}});
  }
  j["random_regime_days"] = c.random_regime_days;
  j["random_regime_spread"] = c.random_regime_spread;
  j["garch"] = ordered_json::array();
  for (const auto& g : c.garch) j["garch"].push_back({{"omega", g.omega}, {"alpha", g.alpha}, {"beta", g.beta}});
  j["residual_vol_min"] = c.residual_vol_min;
  j["residual_vol_max"] = c.residual_vol_max;
  j["missing_rate"] = c.missing_rate;
  j["cap_median"] = c.cap_median;
  j["cap_log_sigma"] = c.cap_log_sigma;
  j["cap_drift"] = c.cap_drift;
  j["loading_drift"] = c.loading_drift;
  return j;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  const ordered_json root = parse_text(text);
  Section s(root, "");
  RunConfig c;
  if (s.has("data")) {
    Section d = s.sub("data");
    DataPaths p;
    d.get("returns", p.returns);
    d.get("loadings", p.loadings);
    d.get("mcaps", p.mcaps);
    d.get("regions", p.regions);
    d.finish();
    if (p.returns.empty() || p.loadings.empty() || p.mcaps.empty()) {
      throw ConfigError("'data' needs returns, loadings and mcaps paths");
    }
    c.data = p;
  }
  if (s.has("synth")) c.synth = read_synth(s.sub("synth"));
  if (c.data.has_value() == c.synth.has_value()) throw ConfigError("config needs exactly one of 'data' and 'synth'");

  if (s.has("schedule")) {
    Section p = s.sub("schedule");
    p.get("first_period", c.first_period);
    p.get("periods", c.periods);
    p.get("period_months", c.period_months);
    p.get("period_step", c.period_step);
    p.finish();
  }
  if (s.has("schemes")) {
    Section p = s.sub("schemes");
    p.get("approaches", c.approaches);
    p.get("variance_models", c.variance_models);
    p.get("windows", c.windows);
    p.finish();
  }
  s.get("subsets", c.subsets);
  if (s.has("factor_model")) {
    Section p = s.sub("factor_model");
    p.get("weighting", c.weighting);
    p.get("constrain_countries", c.constrain_countries);
    p.get("constrain_industries", c.constrain_industries);
    p.finish();
  }
  if (s.has("portfolios")) {
    Section p = s.sub("portfolios");
    p.get("min_market_cap", c.min_market_cap);
    p.get("min_members", c.min_members);
    p.get("max_members", c.max_members);
    p.get("min_per_side", c.min_per_side);
    p.get("random_per_original", c.random_per_original);
    p.get("random_draws", c.random_draws);
    p.finish();
  }
  if (s.has("garch")) {
    Section p = s.sub("garch");
    p.get("history_months", c.garch_history_months);
    p.get("min_observations", c.garch_min_observations);
    p.get("max_iterations", c.garch_max_iterations);
    p.get("gradient_tolerance", c.garch_gradient_tolerance);
    p.get("persistence_cap", c.garch_persistence_cap);
    p.get("constant_variance", c.garch_constant_variance);
    p.finish();
  }
  if (s.has("repair")) {
    Section p = s.sub("repair");
    p.get("tol", c.repair_tol);
    p.get("max_iterations", c.repair_max_iterations);
    p.get("convergence", c.repair_convergence);
    p.finish();
  }
  if (s.has("output")) {
    Section p = s.sub("output");
    p.get("dir", c.output_dir);
    p.get("plot_data", c.plot_data);
    p.get("estimates", c.write_estimates);
    p.get("garch_diagnostics", c.write_garch_diagnostics);
    p.finish();
  }
  s.get("seed", c.seed);
  s.get("workers", c.workers);
  s.finish();

  // Validate derived values early so errors name the config.
  c.schemes();
  c.subset_definitions();
  c.schedule();
  c.fit_config();
  if (c.min_members < 1 || c.max_members < c.min_members || c.min_per_side < 0) {
    throw ConfigError("'portfolios' needs 1 <= min_members <= max_members and min_per_side >= 0");
  }
  if (c.random_per_original < 0 || c.random_draws < 1) {
    throw ConfigError("'portfolios' needs random_per_original >= 0 and random_draws >= 1");
  }
  if (c.garch_history_months < 1 || c.garch_persistence_cap <= 0.0 || c.garch_persistence_cap >= 1.0) {
    throw ConfigError("'garch' needs history_months >= 1 and persistence_cap in (0, 1)");
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig c = parse_run_config(buf.str());
  const auto parent = std::filesystem::path(path).parent_path();
  c.base_dir = parent.empty() ? "." : parent.string();
  return c;
}

std::string serialize_run_config(const RunConfig& c) {
  ordered_json j;
  if (c.data) {
    j["data"] = {{"returns", c.data->returns},
                 {"loadings", c.data->loadings},
                 {"mcaps", c.data->mcaps},
                 {"regions", c.data->regions}};
  }
  if (c.synth) j["synth"] = write_synth(*c.synth);
  j["schedule"] = {{"first_period", c.first_period},
                   {"periods", c.periods},
                   {"period_months", c.period_months},
                   {"period_step", c.period_step}};
  j["schemes"] = {{"approaches", c.approaches}, {"variance_models", c.variance_models}, {"windows", c.windows}};
  j["subsets"] = c.subsets;
  j["factor_model"] = {{"weighting", c.weighting},
                       {"constrain_countries", c.constrain_countries},
                       {"constrain_industries", c.constrain_industries}};
  j["portfolios"] = {{"min_market_cap", c.min_market_cap},
                     {"min_members", c.min_members},
                     {"max_members", c.max_members},
                     {"min_per_side", c.min_per_side},
                     {"random_per_original", c.random_per_original},
                     {"random_draws", c.random_draws}};
  j["garch"] = {{"history_months", c.garch_history_months},
                {"min_observations", c.garch_min_observations},
                {"max_iterations", c.garch_max_iterations},
                {"gradient_tolerance", c.garch_gradient_tolerance},
                {"persistence_cap", c.garch_persistence_cap},
                {"constant_variance", c.garch_constant_variance}};
  j["repair"] = {{"tol", c.repair_tol},
                 {"max_iterations", c.repair_max_iterations},
                 {"convergence", c.repair_convergence}};
  j["output"] = {{"dir", c.output_dir},
                 {"plot_data", c.plot_data},
                 {"estimates", c.write_estimates},
                 {"garch_diagnostics", c.write_garch_diagnostics}};
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  return j.dump(2) + "\n";
}

SynthConfig parse_synth_config(const std::string& text) {
  const ordered_json root = parse_text(text);
  return read_synth(Section(root, "synth"));
}

std::string serialize_synth_config(const SynthConfig& config) { return write_synth(config).dump(2) + "\n"; }

std::vector<SchemeId> RunConfig::schemes() const {
  std::vector<SchemeId> out;
  if (approaches.empty() || variance_models.empty() || windows.empty()) {
    throw ConfigError("at least one scheme is required");
  }
  for (const auto& a : approaches) {
    if (a != "direct" && a != "factor") throw ConfigError("unknown approach '" + a + "'");
    for (const auto& v : variance_models) {
      if (v != "naive" && v != "garch") throw ConfigError("unknown variance model '" + v + "'");
      for (int q : windows) {
        if (q < 1) throw ConfigError("window lengths must be positive");
        out.push_back({a == "direct" ? Approach::direct : Approach::factor,
                       v == "naive" ? VarianceModel::naive : VarianceModel::garch, q});
      }
    }
  }
  return out;
}

std::vector<SubsetDefinition> RunConfig::subset_definitions() const {
  if (subsets.empty()) return standard_subsets();
  std::vector<SubsetDefinition> out;
  for (const auto& name : subsets) {
    auto s = find_standard_subset(name);
    if (!s) throw ConfigError("unknown subset '" + name + "'");
    out.push_back(*s);
  }
  return out;
}

PeriodSchedule RunConfig::schedule() const {
  if (periods < 1) throw ConfigError("schedule is empty (periods < 1)");
  if (period_months < 1 || period_step < 1) throw ConfigError("period_months and period_step must be positive");
  MonthId first;
  try {
    first = parse_month(first_period);
  } catch (const std::exception&) {
    throw ConfigError("'schedule.first_period' must look like YYYY-MM");
  }
  return PeriodSchedule{first, periods, period_months, period_step};
}

FitConfig RunConfig::fit_config() const {
  FitConfig f;
  if (weighting == "market_cap") {
    f.weighting = RegressionWeighting::market_cap;
  } else if (weighting == "sqrt_market_cap") {
    f.weighting = RegressionWeighting::sqrt_market_cap;
  } else {
    throw ConfigError("unknown weighting '" + weighting + "'");
  }
  f.constrain_countries = constrain_countries;
  f.constrain_industries = constrain_industries;
  return f;
}

PortfolioRules RunConfig::rules() const {
  return PortfolioRules{min_market_cap, static_cast<std::size_t>(min_members),
                        static_cast<std::size_t>(max_members), static_cast<std::size_t>(min_per_side)};
}

ForecastOptions RunConfig::forecast_options() const {
  ForecastOptions f;
  f.garch_history_months = garch_history_months;
  f.garch.min_observations = static_cast<std::size_t>(garch_min_observations);
  f.garch.max_iterations = garch_max_iterations;
  f.garch.gradient_tolerance = garch_gradient_tolerance;
  f.garch.persistence_cap = garch_persistence_cap;
  f.garch.constant_variance = garch_constant_variance;
  f.repair.tol = repair_tol;
  f.repair.max_iterations = repair_max_iterations;
  f.repair.convergence = repair_convergence;
  f.workers = workers;
  return f;
}

BacktestConfig RunConfig::backtest_config() const {
  BacktestConfig b;
  b.schemes = schemes();
  b.subsets = subset_definitions();
  b.schedule = schedule();
  b.rules = rules();
  b.random_per_original = random_per_original;
  b.random_draws = random_draws;
  b.seed = seed;
  b.forecast = forecast_options();
  b.workers = workers;
  return b;
}

std::string RunConfig::resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

}  // namespace volrank
