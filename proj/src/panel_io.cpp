#include "volrank/panel_io.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "volrank/csv.hpp"
#include "volrank/errors.hpp"

namespace volrank {

namespace {

constexpr std::string_view kReturnsHeader = "company,date,log_return";
constexpr std::string_view kLoadingsHeader = "company,month,factor,value";
constexpr std::string_view kMcapsHeader = "company,month,market_cap";

struct ReturnRow {
  std::string company;
  std::size_t day;
  double value;
};

struct LoadingRow {
  std::string company;
  std::size_t month;
  std::string factor;
  double value;
};

struct CapRow {
  std::string company;
  std::size_t month;
  double value;
};

Date parse_date_at(std::string_view text, const std::string& path, std::size_t line) {
  try {
    return parse_date(text);
  } catch (const std::invalid_argument& e) {
    throw ParseError(path, line, e.what());
  }
}

std::size_t month_at(std::string_view text, const TradingCalendar& calendar,
                     const std::string& path, std::size_t line) {
  MonthId m;
  try {
    m = parse_month(text);
  } catch (const std::invalid_argument& e) {
    throw ParseError(path, line, e.what());
  }
  const auto idx = calendar.month_index(m);
  if (!idx) throw ParseError(path, line, "month " + std::string(text) + " is not in the calendar");
  return *idx;
}

void require_company(std::string_view field, const std::string& path, std::size_t line) {
  if (field.empty()) throw ParseError(path, line, "empty company id");
}

}  // namespace

TradingCalendar infer_calendar(const std::string& returns_file) {
  std::set<std::chrono::sys_days> days;
  csv::read(returns_file, kReturnsHeader, [&](const auto& f, std::size_t line) {
    days.insert(std::chrono::sys_days{parse_date_at(f[1], returns_file, line)});
  });
  std::vector<Date> out;
  out.reserve(days.size());
  for (const auto& d : days) out.emplace_back(d);
  return TradingCalendar(std::move(out));
}

PanelSet load_panels(const std::string& returns_file, const std::string& loadings_file,
                     const std::string& mcaps_file, const TradingCalendar& calendar) {
  std::vector<ReturnRow> returns;
  csv::read(returns_file, kReturnsHeader, [&](const auto& f, std::size_t line) {
    require_company(f[0], returns_file, line);
    const Date d = parse_date_at(f[1], returns_file, line);
    const auto idx = calendar.index_of(d);
    if (!idx) {
      throw ParseError(returns_file, line, "date " + format_date(d) + " is not in the calendar");
    }
    returns.push_back({std::string(f[0]), *idx, csv::parse_double(f[2], returns_file, line)});
  });

  std::vector<LoadingRow> loadings;
  std::vector<std::string> factor_order;
  std::set<std::string> factor_seen;
  csv::read(loadings_file, kLoadingsHeader, [&](const auto& f, std::size_t line) {
    require_company(f[0], loadings_file, line);
    const std::size_t m = month_at(f[1], calendar, loadings_file, line);
    std::string factor(f[2]);
    try {
      parse_factor(factor);
    } catch (const std::invalid_argument& e) {
      throw ParseError(loadings_file, line, e.what());
    }
    if (factor_seen.insert(factor).second) factor_order.push_back(factor);
    loadings.push_back({std::string(f[0]), m, std::move(factor),
                        csv::parse_double(f[3], loadings_file, line)});
  });

  std::vector<CapRow> caps;
  csv::read(mcaps_file, kMcapsHeader, [&](const auto& f, std::size_t line) {
    require_company(f[0], mcaps_file, line);
    const std::size_t m = month_at(f[1], calendar, mcaps_file, line);
    const double v = csv::parse_double(f[2], mcaps_file, line);
    if (!(v > 0.0)) throw ParseError(mcaps_file, line, "market cap must be positive");
    caps.push_back({std::string(f[0]), m, v});
  });

  std::set<std::string> company_set;
  for (const auto& r : returns) company_set.insert(r.company);
  for (const auto& r : loadings) company_set.insert(r.company);
  for (const auto& r : caps) company_set.insert(r.company);
  std::vector<std::string> companies(company_set.begin(), company_set.end());
  std::unordered_map<std::string, std::size_t> company_index;
  for (std::size_t k = 0; k < companies.size(); ++k) company_index.emplace(companies[k], k);

  // Factor order: market, then styles, countries, industries in file order.
  std::vector<Factor> factors{{"market", FactorKind::market}};
  for (FactorKind kind : {FactorKind::style, FactorKind::country, FactorKind::industry}) {
    for (const auto& name : factor_order) {
      Factor f = parse_factor(name);
      if (f.kind == kind) factors.push_back(std::move(f));
    }
  }
  std::unordered_map<std::string, std::size_t> factor_index;
  for (std::size_t j = 0; j < factors.size(); ++j) factor_index.emplace(factors[j].name, j);

  const auto n_companies = static_cast<Eigen::Index>(companies.size());
  const auto n_days = static_cast<Eigen::Index>(calendar.size());
  const auto n_months = static_cast<Eigen::Index>(calendar.month_count());

  PanelSet out;
  out.returns.companies = companies;
  out.returns.calendar = calendar;
  out.returns.values = Eigen::MatrixXd::Constant(n_companies, n_days, kMissing);
  for (const auto& r : returns) {
    double& cell = out.returns.values(static_cast<Eigen::Index>(company_index.at(r.company)),
                                      static_cast<Eigen::Index>(r.day));
    if (!is_missing(cell)) {
      throw ConflictError("duplicate return for company '" + r.company + "' on " +
                          format_date(calendar.day(r.day)));
    }
    cell = r.value;
  }

  out.loadings.factors = factors;
  out.loadings.companies = companies;
  out.loadings.first_month = calendar.first_month();
  out.loadings.months.assign(
      static_cast<std::size_t>(n_months),
      Eigen::MatrixXd::Constant(n_companies, static_cast<Eigen::Index>(factors.size()), kMissing));
  const std::size_t market = 0;
  for (const auto& r : loadings) {
    const auto k = static_cast<Eigen::Index>(company_index.at(r.company));
    const auto j = static_cast<Eigen::Index>(factor_index.at(r.factor));
    double& cell = out.loadings.months[r.month](k, j);
    if (!is_missing(cell)) {
      throw ConflictError("duplicate loading for company '" + r.company + "', factor '" +
                          r.factor + "' in " +
                          format_month(calendar.first_month() + static_cast<int>(r.month)));
    }
    cell = r.value;
  }
  for (auto& month : out.loadings.months) {
    for (Eigen::Index k = 0; k < n_companies; ++k) {
      if (!month.row(k).array().isNaN().all()) month(k, static_cast<Eigen::Index>(market)) = 1.0;
    }
  }

  out.mcaps.companies = companies;
  out.mcaps.first_month = calendar.first_month();
  out.mcaps.values = Eigen::MatrixXd::Constant(n_companies, n_months, kMissing);
  out.mcaps.proxied = BoolMatrix::Constant(n_companies, n_months, false);
  for (const auto& r : caps) {
    double& cell = out.mcaps.values(static_cast<Eigen::Index>(company_index.at(r.company)),
                                    static_cast<Eigen::Index>(r.month));
    if (!is_missing(cell)) {
      throw ConflictError("duplicate market cap for company '" + r.company + "' in " +
                          format_month(calendar.first_month() + static_cast<int>(r.month)));
    }
    cell = r.value;
  }
  return out;
}

void write_returns_csv(const std::string& path, const ReturnPanel& returns) {
  auto out = csv::open_out(path);
  out << kReturnsHeader << '\n';
  for (std::size_t k = 0; k < returns.companies.size(); ++k) {
    for (std::size_t t = 0; t < returns.calendar.size(); ++t) {
      const double v = returns.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t));
      if (is_missing(v)) continue;
      out << returns.companies[k] << ',' << format_date(returns.calendar.day(t)) << ','
          << csv::format_double(v) << '\n';
    }
  }
}

void write_loadings_csv(const std::string& path, const LoadingPanel& loadings) {
  auto out = csv::open_out(path);
  out << kLoadingsHeader << '\n';
  for (std::size_t m = 0; m < loadings.months.size(); ++m) {
    const std::string month = format_month(loadings.first_month + static_cast<int>(m));
    const auto& mat = loadings.months[m];
    for (std::size_t k = 0; k < loadings.companies.size(); ++k) {
      for (std::size_t j = 0; j < loadings.factors.size(); ++j) {
        const double v = mat(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
        if (is_missing(v)) continue;
        out << loadings.companies[k] << ',' << month << ',' << loadings.factors[j].name << ','
            << csv::format_double(v) << '\n';
      }
    }
  }
}

void write_mcaps_csv(const std::string& path, const MarketCapSeries& mcaps) {
  auto out = csv::open_out(path);
  out << kMcapsHeader << '\n';
  for (Eigen::Index m = 0; m < mcaps.values.cols(); ++m) {
    const std::string month = format_month(mcaps.first_month + static_cast<int>(m));
    for (std::size_t k = 0; k < mcaps.companies.size(); ++k) {
      const double v = mcaps.values(static_cast<Eigen::Index>(k), m);
      if (is_missing(v)) continue;
      out << mcaps.companies[k] << ',' << month << ',' << csv::format_double(v) << '\n';
    }
  }
}

}  // namespace volrank
