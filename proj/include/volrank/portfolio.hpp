#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "volrank/calendar.hpp"
#include "volrank/panels.hpp"

namespace volrank {

enum class PortfolioKind { long_only, long_short };
enum class Origin { original, random };
enum class RestrictionType { unrestricted, region, subregion };

std::string_view to_string(PortfolioKind kind);
std::string_view to_string(RestrictionType type);

struct Restriction {
  RestrictionType type = RestrictionType::unrestricted;
  std::string name;  // region or subregion name; empty when unrestricted
};

struct Member {
  std::size_t company = 0;  // row in the panels' company list
  double weight = 0.0;
};

struct Portfolio {
  std::string id;
  PortfolioKind kind = PortfolioKind::long_only;
  Restriction restriction;
  /// Factor name the weights are built from, or "mc" for market cap.
  std::string basis;
  /// "style", "country", "industry" or "mc".
  std::string basis_kind;
  Origin origin = Origin::original;
  MonthId period;  // first month of the test period
  std::vector<Member> members;

  std::size_t size() const { return members.size(); }
};

/// ISO 3166 country code -> region/subregion.
class RegionMap {
 public:
  struct Entry {
    std::string region;
    std::string subregion;  // may be empty
  };

  void add(std::string country, std::string region, std::string subregion);
  const std::map<std::string, Entry>& entries() const { return entries_; }
  std::vector<std::string> regions() const;
  std::vector<std::string> subregions() const;
  std::vector<std::string> countries_in(RestrictionType type, std::string_view name) const;

  /// The 3 regions / 9 subregions used for equity portfolios, covering 27 markets.
  static RegionMap standard();
  /// `country,region,subregion` CSV.
  static RegionMap read_csv(const std::string& path);
  void write_csv(const std::string& path) const;

 private:
  std::map<std::string, Entry> entries_;
};

struct PortfolioRules {
  double min_market_cap = 200e6;
  std::size_t min_members = 40;
  std::size_t max_members = 300;
  std::size_t min_per_side = 20;
};

struct BuildResult {
  std::optional<Portfolio> portfolio;
  std::string skip_reason;
};

/// Long portfolio over candidates with a positive basis loading and cap at
/// least the minimum: the largest `max_members` by cap, weights proportional
/// to the loading and summing to one. Skipped below `min_members`.
/// `candidates` may be empty (all companies are candidates).
BuildResult build_long(std::span<const double> basis_loadings, std::span<const double> caps,
                       const std::vector<bool>& candidates, const PortfolioRules& rules = {});

/// Long/short portfolio over candidates with a non-zero loading. Within each
/// side weights are proportional to the loading; the long side sums to 0.5
/// and the short side to -0.5. Skipped below `min_members` or with fewer
/// than `min_per_side` companies on either side.
BuildResult build_long_short(std::span<const double> basis_loadings, std::span<const double> caps,
                             const std::vector<bool>& candidates, const PortfolioRules& rules = {});

struct PortfolioUniverse {
  std::vector<Portfolio> portfolios;
  std::vector<std::string> skipped;  // "<id>: <reason>"
};

/// Builds every original portfolio for the test period starting at
/// `period` from the loadings and caps of the month before it:
///  - long, unrestricted: every style, country and industry factor, plus mc;
///  - long/short, unrestricted: every style factor;
///  - long, per region and per subregion: every style factor, plus mc;
///  - long/short, per region and per subregion: every style factor.
/// Only companies eligible in that month are considered.
PortfolioUniverse build_universe_of_portfolios(const LoadingPanel& loadings,
                                               const MarketCapSeries& mcaps,
                                               const UniverseMask& mask,
                                               const RegionMap& regions, MonthId period,
                                               const PortfolioRules& rules = {});

/// Draws `draws` members with replacement using |w| as probabilities.
/// Repeated draws merge; the result is renormalised so sum |w| = 1, and a
/// long/short source yields sides of +0.5 / -0.5.
Portfolio resample_random(const Portfolio& source, std::uint64_t seed, int draws = 50,
                          int replicate = 1);

/// Human-readable invariant violations (empty when valid). Size bounds and
/// per-side counts are only checked for original portfolios.
std::vector<std::string> check_invariants(const Portfolio& p, const PortfolioRules& rules = {},
                                          double tol = 1e-12);

void write_portfolios_csv(const std::string& path, std::span<const Portfolio> portfolios,
                          const std::vector<std::string>& companies);

/// Reads `portfolio_id,period,company,weight`. Kind is long/short when any
/// weight is negative; ids containing "/random" are marked random.
std::vector<Portfolio> read_portfolios_csv(const std::string& path,
                                           const std::vector<std::string>& companies);

}  // namespace volrank
