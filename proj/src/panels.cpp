#include "volrank/panels.hpp"

#include <stdexcept>

namespace volrank {

std::string_view to_string(FactorKind kind) {
  switch (kind) {
    case FactorKind::market: return "market";
    case FactorKind::style: return "style";
    case FactorKind::country: return "country";
    case FactorKind::industry: return "industry";
  }
  return "unknown";
}

std::string_view Factor::short_name() const {
  const auto slash = name.find('/');
  return slash == std::string::npos ? std::string_view(name) : std::string_view(name).substr(slash + 1);
}

Factor parse_factor(std::string_view name) {
  if (name == "market") return {std::string(name), FactorKind::market};
  const auto slash = name.find('/');
  if (slash != std::string_view::npos && slash + 1 < name.size()) {
    const auto prefix = name.substr(0, slash);
    if (prefix == "style") return {std::string(name), FactorKind::style};
    if (prefix == "country") return {std::string(name), FactorKind::country};
    if (prefix == "industry") return {std::string(name), FactorKind::industry};
  }
  throw std::invalid_argument("factor '" + std::string(name) +
                              "' must be 'market' or prefixed with style/, country/ or industry/");
}

std::size_t ReturnPanel::missing_count() const {
  return static_cast<std::size_t>(values.array().isNaN().count());
}

ReturnPanel window_slice(const ReturnPanel& panel, MonthId test_start, int q) {
  const DayRange r = panel.calendar.window(test_start, q);
  ReturnPanel out;
  out.companies = panel.companies;
  out.calendar = panel.calendar.slice(r);
  out.values = panel.values.middleCols(static_cast<Eigen::Index>(r.begin),
                                       static_cast<Eigen::Index>(r.size()));
  return out;
}

const Eigen::MatrixXd& LoadingPanel::at(MonthId m) const {
  const int off = m - first_month;
  if (off < 0 || off >= static_cast<int>(months.size())) {
    throw std::out_of_range("no loadings for month " + format_month(m));
  }
  return months[static_cast<std::size_t>(off)];
}

std::optional<std::size_t> LoadingPanel::factor_index(std::string_view name) const {
  for (std::size_t j = 0; j < factors.size(); ++j) {
    if (factors[j].name == name) return j;
  }
  return std::nullopt;
}

std::optional<std::size_t> LoadingPanel::market_index() const {
  for (std::size_t j = 0; j < factors.size(); ++j) {
    if (factors[j].kind == FactorKind::market) return j;
  }
  return std::nullopt;
}

std::vector<std::size_t> LoadingPanel::indices_of(FactorKind kind) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < factors.size(); ++j) {
    if (factors[j].kind == kind) out.push_back(j);
  }
  return out;
}

bool LoadingPanel::registered(std::size_t company, std::size_t month) const {
  const auto row = months[month].row(static_cast<Eigen::Index>(company));
  return !row.array().isNaN().all();
}

Eigen::VectorXd MarketCapSeries::at(MonthId m) const {
  const int off = m - first_month;
  if (off < 0 || off >= values.cols()) {
    throw std::out_of_range("no market caps for month " + format_month(m));
  }
  return values.col(off);
}

}  // namespace volrank
