#include "volrank/preprocessing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace volrank {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return kMissing;
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace

PreprocessedPanels apply_preprocessing(const LoadingPanel& loadings, const MarketCapSeries& mcaps,
                                       const ReturnPanel& returns) {
  const auto n_companies = static_cast<Eigen::Index>(loadings.companies.size());
  const auto n_months = static_cast<Eigen::Index>(loadings.months.size());
  if (returns.companies != loadings.companies || mcaps.companies != loadings.companies ||
      mcaps.values.cols() != n_months ||
      static_cast<Eigen::Index>(returns.calendar.month_count()) != n_months) {
    throw std::invalid_argument("apply_preprocessing: panels are not aligned");
  }

  PreprocessedPanels out{loadings, mcaps, UniverseMask{loadings.first_month, {}}};
  out.mask.eligible = BoolMatrix::Constant(n_companies, n_months, false);
  if (out.mcaps.proxied.rows() != n_companies || out.mcaps.proxied.cols() != n_months) {
    out.mcaps.proxied = BoolMatrix::Constant(n_companies, n_months, false);
  }

  std::vector<Eigen::Index> zero_fill;
  for (std::size_t j = 0; j < loadings.factors.size(); ++j) {
    const auto kind = loadings.factors[j].kind;
    if (kind == FactorKind::country || kind == FactorKind::industry) {
      zero_fill.push_back(static_cast<Eigen::Index>(j));
    }
  }

  for (Eigen::Index m = 0; m < n_months; ++m) {
    const MonthId month = loadings.first_month + static_cast<int>(m);
    const DayRange days = returns.calendar.month_days(month);
    auto& mat = out.loadings.months[static_cast<std::size_t>(m)];

    std::vector<double> present_caps;
    for (Eigen::Index k = 0; k < n_companies; ++k) {
      const double c = mcaps.values(k, m);
      if (!is_missing(c)) present_caps.push_back(c);
    }
    const double median_cap = median(std::move(present_caps));

    for (Eigen::Index k = 0; k < n_companies; ++k) {
      const bool registered = loadings.registered(static_cast<std::size_t>(k), static_cast<std::size_t>(m));
      if (!registered) continue;
      for (Eigen::Index j : zero_fill) {
        if (is_missing(mat(k, j))) mat(k, j) = 0.0;
      }

      double& cap = out.mcaps.values(k, m);
      if (is_missing(cap)) {
        double proxy = kMissing;
        if (m > 0 && !is_missing(out.mcaps.values(k, m - 1))) {
          const double weight = std::sqrt(out.mcaps.values(k, m - 1));
          proxy = weight * weight;
        } else {
          proxy = median_cap;
        }
        if (!is_missing(proxy)) {
          cap = proxy;
          out.mcaps.proxied(k, m) = true;
        }
      }

      bool has_return = false;
      for (std::size_t t = days.begin; t < days.end && !has_return; ++t) {
        has_return = returns.observed(static_cast<std::size_t>(k), t);
      }
      out.mask.eligible(k, m) = has_return;
    }
  }
  return out;
}

}  // namespace volrank
