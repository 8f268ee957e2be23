#pragma once

#include <string>

#include "volrank/calendar.hpp"
#include "volrank/panels.hpp"

namespace volrank {

/// Trading calendar spanning every date that appears in a returns file.
TradingCalendar infer_calendar(const std::string& returns_file);

/// Reads the three panel files and aligns them on `calendar`.
///
/// returns.csv  `company,date,log_return`   (absent row = missing)
/// loadings.csv `company,month,factor,value`
/// mcaps.csv    `company,month,market_cap`
///
/// Companies are the sorted union over all files. Factors keep file order
/// within each block (market, style, country, industry); a `market` column
/// is added if absent and set to 1 for every company with registered
/// loadings in a month. Dates or months outside the calendar, malformed rows
/// and non-positive caps raise ParseError; duplicate cells raise
/// ConflictError.
PanelSet load_panels(const std::string& returns_file, const std::string& loadings_file,
                     const std::string& mcaps_file, const TradingCalendar& calendar);

void write_returns_csv(const std::string& path, const ReturnPanel& returns);
void write_loadings_csv(const std::string& path, const LoadingPanel& loadings);
void write_mcaps_csv(const std::string& path, const MarketCapSeries& mcaps);

}  // namespace volrank
