#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "volrank/calendar.hpp"

namespace volrank {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return v != v; }

using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

enum class FactorKind { market, style, country, industry };

std::string_view to_string(FactorKind kind);

/// Factor names carry their block as a prefix: `market`, `style/<name>`,
/// `country/<ISO code>`, `industry/<name>`.
struct Factor {
  std::string name;
  FactorKind kind = FactorKind::style;

  /// Part after the block prefix (the full name for `market`).
  std::string_view short_name() const;
};

/// Throws std::invalid_argument for names without a known block prefix.
Factor parse_factor(std::string_view name);

/// Companies x trading days of daily log-returns; NaN marks a missing cell.
struct ReturnPanel {
  std::vector<std::string> companies;
  TradingCalendar calendar;
  Eigen::MatrixXd values;

  std::size_t company_count() const { return companies.size(); }
  std::size_t day_count() const { return calendar.size(); }
  bool observed(std::size_t k, std::size_t t) const { return !is_missing(values(k, t)); }
  std::size_t missing_count() const;
};

/// Restrict a panel to the `q` calendar months before `test_start`.
ReturnPanel window_slice(const ReturnPanel& panel, MonthId test_start, int q);

/// Companies x factors loadings per calendar month; NaN marks missing. A
/// company with every entry of a month missing has no registered loadings.
struct LoadingPanel {
  std::vector<Factor> factors;
  std::vector<std::string> companies;
  MonthId first_month;
  std::vector<Eigen::MatrixXd> months;  // one companies x factors matrix per month

  std::size_t factor_count() const { return factors.size(); }
  std::size_t month_count() const { return months.size(); }
  const Eigen::MatrixXd& at(MonthId m) const;
  std::optional<std::size_t> factor_index(std::string_view name) const;
  std::optional<std::size_t> market_index() const;
  std::vector<std::size_t> indices_of(FactorKind kind) const;
  bool registered(std::size_t company, std::size_t month) const;
};

/// Companies x months market capitalisation; NaN marks missing.
struct MarketCapSeries {
  std::vector<std::string> companies;
  MonthId first_month;
  Eigen::MatrixXd values;
  BoolMatrix proxied;  // true where a missing value was replaced by the proxy

  Eigen::VectorXd at(MonthId m) const;
};

struct UniverseMask {
  MonthId first_month;
  BoolMatrix eligible;  // companies x months

  bool at(std::size_t company, MonthId m) const {
    return eligible(static_cast<Eigen::Index>(company), m - first_month);
  }
};

/// Returns, loadings and caps aligned on one company list and calendar.
struct PanelSet {
  ReturnPanel returns;
  LoadingPanel loadings;
  MarketCapSeries mcaps;
};

}  // namespace volrank
