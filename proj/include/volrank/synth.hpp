#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "volrank/panels.hpp"
#include "volrank/portfolio.hpp"

namespace volrank {

/// Vol multiplier for one factor (or all factors when `factor` is empty)
/// from `start_day` until the next regime of that factor.
struct FactorVolRegime {
  std::string factor;
  int start_day = 0;
  double scale = 1.0;

  bool operator==(const FactorVolRegime&) const = default;
};

struct SynthGarch {
  double omega = 0.0;
  double alpha = 0.0;
  double beta = 0.0;

  bool operator==(const SynthGarch&) const = default;
};

struct SynthConfig {
  int n_companies = 200;
  int n_styles = 3;
  int n_countries = 2;
  int n_industries = 2;
  int n_days = 546;
  std::uint64_t seed = 1;
  std::string start_date = "2011-01-03";

  /// Base daily factor vols by block.
  double market_vol = 0.010;
  double style_vol = 0.004;
  double country_vol = 0.005;
  double industry_vol = 0.005;
  /// Equicorrelation of factor innovations.
  double factor_correlation = 0.0;

  std::vector<FactorVolRegime> factor_vol_regimes;
  /// When positive, every factor draws an independent vol multiplier per
  /// block of this many days, log-uniform in [1/spread, spread].
  int random_regime_days = 0;
  double random_regime_spread = 2.0;

  /// Empty: i.i.d. Gaussian factor returns. One entry: the same GARCH(1,1)
  /// for every factor. Otherwise one entry per factor. omega is applied on
  /// the unit scale and multiplied by the squared base vol and regime scale.
  std::vector<SynthGarch> garch;

  /// Residual daily vol of each company, uniform in [min, max].
  double residual_vol_min = 0.01;
  double residual_vol_max = 0.02;
  double missing_rate = 0.0;

  /// log-normal market caps (median, sigma of log cap) and monthly drifts.
  double cap_median = 1e9;
  double cap_log_sigma = 1.2;
  double cap_drift = 0.05;
  double loading_drift = 0.1;

  bool operator==(const SynthConfig&) const = default;

  /// Throws ConfigError when counts or rates are out of range.
  void validate() const;
};

struct SynthTruth {
  std::vector<Factor> factors;
  Eigen::MatrixXd factor_returns;    // factors x days
  Eigen::MatrixXd factor_variances;  // factors x days, conditional
  Eigen::MatrixXd factor_correlation;
  Eigen::VectorXd residual_vols;     // per company

  /// Unconditional factor covariance at base vols (regime scale 1, no GARCH
  /// deviation).
  Eigen::MatrixXd base_factor_covariance() const;
  Eigen::VectorXd base_factor_vols;
};

struct SynthData {
  PanelSet panels;
  SynthTruth truth;
};

/// Country codes used for the first n countries; covers the standard
/// region map, starting with the United States.
std::vector<std::string> synth_countries(int n);

SynthData generate(const SynthConfig& config);

/// Writes returns.csv, loadings.csv, mcaps.csv, regions.csv and
/// truth_factor_returns.csv into `dir`.
void write_synth(const std::string& dir, const SynthData& data);

}  // namespace volrank
