#pragma once

#include "volrank/panels.hpp"

namespace volrank {

struct PreprocessedPanels {
  LoadingPanel loadings;
  MarketCapSeries mcaps;
  UniverseMask mask;
};

/// Month-level data cleaning applied before any estimation:
///  - missing country and industry loadings of a registered company are set to 0
///    (missing style loadings stay missing);
///  - a registered company's missing market cap is replaced by the square of its
///    previous-month regression weight sqrt(mc), i.e. the previous month's cap,
///    or by the month's cross-sectional median cap when there is no earlier
///    value; replaced cells are flagged in `mcaps.proxied`;
///  - a company is ineligible for a month when it has no registered loadings
///    or no observed return in that month.
/// Idempotent.
PreprocessedPanels apply_preprocessing(const LoadingPanel& loadings, const MarketCapSeries& mcaps,
                                       const ReturnPanel& returns);

}  // namespace volrank
