#pragma once

#include <string>

#include "volrank/backtest.hpp"

namespace volrank {

/// One `mean_tau_<subset>.csv` per subset: rows approach x variance model,
/// columns q ascending. Cells without a defined tau are written as NA.
void write_mean_tau_tables(const std::string& dir, const TauReport& report);

/// Tidy per-period tau: `tau_series_<subset>.csv` with
/// `period,approach,variance_model,q,tau`.
void write_tau_series(const std::string& dir, const TauReport& report);

/// Counts, exclusions and subset sizes as JSON (`summary.json`).
void write_summary(const std::string& dir, const TauReport& report);

/// `estimates.csv`: `portfolio,period,scheme,q,estimate` plus the target
/// volatility as scheme `target`. Needs a report run with keep_details.
void write_estimates(const std::string& dir, const TauReport& report);

/// `garch_diagnostics.csv`: `series,period,mu,omega,alpha,beta,status`.
/// Needs a report run with keep_details.
void write_garch_diagnostics(const std::string& dir, const TauReport& report);

/// Fixed six-decimal formatting used in every report table.
std::string format_tau(double v);

}  // namespace volrank
