#include "volrank/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "volrank/csv.hpp"
#include "volrank/errors.hpp"
#include "volrank/random.hpp"

namespace volrank {

std::string_view to_string(PortfolioKind kind) {
  return kind == PortfolioKind::long_only ? "long" : "long_short";
}

std::string_view to_string(RestrictionType type) {
  switch (type) {
    case RestrictionType::unrestricted: return "unrestricted";
    case RestrictionType::region: return "region";
    case RestrictionType::subregion: return "subregion";
  }
  return "unknown";
}

void RegionMap::add(std::string country, std::string region, std::string subregion) {
  if (country.empty() || region.empty()) {
    throw std::invalid_argument("region map entries need a country and a region");
  }
  if (entries_.contains(country)) {
    throw ConflictError("country '" + country + "' mapped twice");
  }
  entries_.emplace(std::move(country), Entry{std::move(region), std::move(subregion)});
}

std::vector<std::string> RegionMap::regions() const {
  std::set<std::string> s;
  for (const auto& [c, e] : entries_) s.insert(e.region);
  return {s.begin(), s.end()};
}

std::vector<std::string> RegionMap::subregions() const {
  std::set<std::string> s;
  for (const auto& [c, e] : entries_) {
    if (!e.subregion.empty()) s.insert(e.subregion);
  }
  return {s.begin(), s.end()};
}

std::vector<std::string> RegionMap::countries_in(RestrictionType type, std::string_view name) const {
  std::vector<std::string> out;
  for (const auto& [c, e] : entries_) {
    if ((type == RestrictionType::region && e.region == name) ||
        (type == RestrictionType::subregion && e.subregion == name)) {
      out.push_back(c);
    }
  }
  return out;
}

RegionMap RegionMap::standard() {
  RegionMap m;
  const std::pair<const char*, std::vector<const char*>> america[] = {
      {"Northern America", {"US", "CA"}},
      {"Latin America and the Caribbean", {"BR", "MX", "CL"}},
  };
  const std::pair<const char*, std::vector<const char*>> asia[] = {
      {"Eastern Asia", {"JP", "CN", "HK", "KR", "TW"}},
      {"South-eastern Asia", {"SG", "TH", "MY"}},
      {"Southern Asia", {"IN"}},
      {"Western Asia", {"IL", "TR"}},
  };
  const std::pair<const char*, std::vector<const char*>> europe[] = {
      {"Northern Europe", {"GB", "SE", "NO", "DK", "FI"}},
      {"Southern Europe", {"IT", "ES"}},
      {"Western Europe", {"DE", "FR", "NL", "CH"}},
  };
  for (const auto& [sub, cs] : america) for (const char* c : cs) m.add(c, "America", sub);
  for (const auto& [sub, cs] : asia) for (const char* c : cs) m.add(c, "Asia", sub);
  for (const auto& [sub, cs] : europe) for (const char* c : cs) m.add(c, "Europe", sub);
  return m;
}

RegionMap RegionMap::read_csv(const std::string& path) {
  RegionMap m;
  csv::read(path, "country,region,subregion", [&](const auto& f, std::size_t line) {
    try {
      m.add(std::string(f[0]), std::string(f[1]), std::string(f[2]));
    } catch (const std::invalid_argument& e) {
      throw ParseError(path, line, e.what());
    }
  });
  return m;
}

void RegionMap::write_csv(const std::string& path) const {
  auto out = csv::open_out(path);
  out << "country,region,subregion\n";
  for (const auto& [c, e] : entries_) out << c << ',' << e.region << ',' << e.subregion << '\n';
}

namespace {

/// Indices passing `keep`, largest caps first (ties by index), at most `limit`.
template <class Keep>
std::vector<std::size_t> select_by_cap(std::span<const double> basis, std::span<const double> caps,
                                       const std::vector<bool>& candidates,
                                       const PortfolioRules& rules, Keep keep) {
  if (basis.size() != caps.size() || (!candidates.empty() && candidates.size() != caps.size())) {
    throw std::invalid_argument("portfolio builder: input vectors disagree in size");
  }
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    if (!candidates.empty() && !candidates[k]) continue;
    if (is_missing(basis[k]) || is_missing(caps[k]) || caps[k] < rules.min_market_cap) continue;
    if (keep(basis[k])) idx.push_back(k);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return caps[a] > caps[b]; });
  if (idx.size() > rules.max_members) idx.resize(rules.max_members);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::string count_reason(std::size_t have, std::size_t need, std::string_view what) {
  return std::to_string(have) + " " + std::string(what) + " (minimum " + std::to_string(need) + ")";
}

}  // namespace

BuildResult build_long(std::span<const double> basis_loadings, std::span<const double> caps,
                       const std::vector<bool>& candidates, const PortfolioRules& rules) {
  const auto idx = select_by_cap(basis_loadings, caps, candidates, rules, [](double x) { return x > 0.0; });
  if (idx.size() < rules.min_members) return {std::nullopt, count_reason(idx.size(), rules.min_members, "companies")};
  double total = 0.0;
  for (std::size_t k : idx) total += basis_loadings[k];
  Portfolio p;
  p.kind = PortfolioKind::long_only;
  p.members.reserve(idx.size());
  for (std::size_t k : idx) p.members.push_back({k, basis_loadings[k] / total});
  return {std::move(p), {}};
}

BuildResult build_long_short(std::span<const double> basis_loadings, std::span<const double> caps,
                             const std::vector<bool>& candidates, const PortfolioRules& rules) {
  const auto idx = select_by_cap(basis_loadings, caps, candidates, rules, [](double x) { return x != 0.0; });
  double pos = 0.0;
  double neg = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  for (std::size_t k : idx) {
    if (basis_loadings[k] > 0.0) {
      pos += basis_loadings[k];
      ++n_pos;
    } else {
      neg -= basis_loadings[k];
      ++n_neg;
    }
  }
  if (idx.size() < rules.min_members) return {std::nullopt, count_reason(idx.size(), rules.min_members, "companies")};
  if (n_pos < rules.min_per_side) return {std::nullopt, count_reason(n_pos, rules.min_per_side, "long positions")};
  if (n_neg < rules.min_per_side) return {std::nullopt, count_reason(n_neg, rules.min_per_side, "short positions")};
  Portfolio p;
  p.kind = PortfolioKind::long_short;
  p.members.reserve(idx.size());
  for (std::size_t k : idx) {
    const double x = basis_loadings[k];
    p.members.push_back({k, x > 0.0 ? 0.5 * x / pos : 0.5 * x / neg});
  }
  return {std::move(p), {}};
}

PortfolioUniverse build_universe_of_portfolios(const LoadingPanel& loadings,
                                               const MarketCapSeries& mcaps,
                                               const UniverseMask& mask,
                                               const RegionMap& regions, MonthId period,
                                               const PortfolioRules& rules) {
  const MonthId month = period - 1;
  const auto& mat = loadings.at(month);
  const Eigen::VectorXd caps_vec = mcaps.at(month);
  const std::size_t n = loadings.companies.size();
  std::vector<double> caps(caps_vec.data(), caps_vec.data() + caps_vec.size());

  std::vector<bool> eligible(n);
  for (std::size_t k = 0; k < n; ++k) eligible[k] = mask.at(k, month);

  auto column = [&](std::size_t j) {
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = mat(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
    return v;
  };

  struct Basis {
    std::string name;
    std::string kind;
    std::vector<double> values;
  };
  std::vector<Basis> styles;
  std::vector<Basis> long_unrestricted;
  for (FactorKind kind : {FactorKind::style, FactorKind::country, FactorKind::industry}) {
    for (std::size_t j : loadings.indices_of(kind)) {
      Basis b{loadings.factors[j].name, std::string(to_string(kind)), column(j)};
      if (kind == FactorKind::style) styles.push_back(b);
      long_unrestricted.push_back(std::move(b));
    }
  }
  const Basis mc{"mc", "mc", caps};
  long_unrestricted.push_back(mc);
  std::vector<Basis> styles_mc = styles;
  styles_mc.push_back(mc);

  PortfolioUniverse out;
  auto emit = [&](const Basis& b, PortfolioKind kind, const Restriction& r, const std::vector<bool>& cand) {
    std::string id = std::string(to_string(kind)) + "/" + std::string(to_string(r.type));
    if (!r.name.empty()) id += "/" + r.name;
    id += "/" + b.name;
    BuildResult res = kind == PortfolioKind::long_only ? build_long(b.values, caps, cand, rules)
                                                       : build_long_short(b.values, caps, cand, rules);
    if (!res.portfolio) {
      out.skipped.push_back(id + ": " + res.skip_reason);
      return;
    }
    Portfolio p = std::move(*res.portfolio);
    p.id = std::move(id);
    p.restriction = r;
    p.basis = b.name;
    p.basis_kind = b.kind;
    p.origin = Origin::original;
    p.period = period;
    out.portfolios.push_back(std::move(p));
  };

  const Restriction unrestricted{};
  for (const auto& b : long_unrestricted) emit(b, PortfolioKind::long_only, unrestricted, eligible);
  for (const auto& b : styles) emit(b, PortfolioKind::long_short, unrestricted, eligible);

  for (RestrictionType type : {RestrictionType::region, RestrictionType::subregion}) {
    const auto names = type == RestrictionType::region ? regions.regions() : regions.subregions();
    for (const auto& name : names) {
      std::vector<std::size_t> country_cols;
      for (const auto& code : regions.countries_in(type, name)) {
        if (auto j = loadings.factor_index("country/" + code)) country_cols.push_back(*j);
      }
      std::vector<bool> cand(n, false);
      for (std::size_t k = 0; k < n; ++k) {
        if (!eligible[k]) continue;
        for (std::size_t j : country_cols) {
          if (mat(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) > 0.0) {
            cand[k] = true;
            break;
          }
        }
      }
      const Restriction r{type, name};
      for (const auto& b : styles_mc) emit(b, PortfolioKind::long_only, r, cand);
      for (const auto& b : styles) emit(b, PortfolioKind::long_short, r, cand);
    }
  }
  return out;
}

Portfolio resample_random(const Portfolio& source, std::uint64_t seed, int draws, int replicate) {
  if (source.members.empty() || draws < 1) {
    throw std::invalid_argument("resample_random: empty portfolio or no draws");
  }
  std::vector<double> cumulative(source.members.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < source.members.size(); ++i) {
    acc += std::abs(source.members[i].weight);
    cumulative[i] = acc;
  }

  const bool long_short = source.kind == PortfolioKind::long_short;
  std::vector<int> counts;
  for (std::uint64_t attempt = 0;; ++attempt) {
    if (attempt == 1000) throw std::logic_error("resample_random: cannot draw both sides of " + source.id);
    std::mt19937_64 rng(derive_seed(seed, {attempt}));
    std::uniform_real_distribution<double> uniform(0.0, acc);
    counts.assign(source.members.size(), 0);
    for (int d = 0; d < draws; ++d) {
      const double u = uniform(rng);
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      if (it == cumulative.end()) --it;
      ++counts[static_cast<std::size_t>(it - cumulative.begin())];
    }
    if (!long_short) break;
    bool has_pos = false;
    bool has_neg = false;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] == 0) continue;
      (source.members[i].weight > 0.0 ? has_pos : has_neg) = true;
    }
    if (has_pos && has_neg) break;
  }

  Portfolio out;
  out.id = source.id + "/random" + std::to_string(replicate);
  out.kind = source.kind;
  out.restriction = source.restriction;
  out.basis = source.basis;
  out.basis_kind = source.basis_kind;
  out.origin = Origin::random;
  out.period = source.period;
  double pos = 0.0;
  double neg = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    const double w = std::copysign(static_cast<double>(counts[i]), source.members[i].weight);
    out.members.push_back({source.members[i].company, w});
    (w > 0.0 ? pos : neg) += std::abs(w);
  }
  for (auto& m : out.members) {
    if (long_short) {
      m.weight = m.weight > 0.0 ? 0.5 * m.weight / pos : 0.5 * m.weight / neg;
    } else {
      m.weight /= pos;
    }
  }
  return out;
}

std::vector<std::string> check_invariants(const Portfolio& p, const PortfolioRules& rules, double tol) {
  std::vector<std::string> out;
  double abs_sum = 0.0;
  double sum = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  for (const auto& m : p.members) {
    abs_sum += std::abs(m.weight);
    sum += m.weight;
    if (m.weight > 0.0) ++n_pos;
    if (m.weight < 0.0) ++n_neg;
  }
  auto fmt = [](double v) { return csv::format_double(v); };
  if (std::abs(abs_sum - 1.0) > tol) out.push_back(p.id + ": sum of |w| is " + fmt(abs_sum) + ", expected 1");
  if (p.kind == PortfolioKind::long_only) {
    if (n_pos != p.members.size()) out.push_back(p.id + ": long portfolio has non-positive weights");
  } else {
    if (std::abs(sum) > tol) out.push_back(p.id + ": long/short weights sum to " + fmt(sum) + ", expected 0");
    if (p.origin == Origin::original && (n_pos < rules.min_per_side || n_neg < rules.min_per_side)) {
      out.push_back(p.id + ": " + std::to_string(n_pos) + " long / " + std::to_string(n_neg) +
                    " short positions (minimum " + std::to_string(rules.min_per_side) + " each)");
    }
  }
  if (p.origin == Origin::original && (p.size() < rules.min_members || p.size() > rules.max_members)) {
    out.push_back(p.id + ": " + std::to_string(p.size()) + " members outside [" +
                  std::to_string(rules.min_members) + ", " + std::to_string(rules.max_members) + "]");
  }
  return out;
}

void write_portfolios_csv(const std::string& path, std::span<const Portfolio> portfolios,
                          const std::vector<std::string>& companies) {
  auto out = csv::open_out(path);
  out << "portfolio_id,period,company,weight\n";
  for (const auto& p : portfolios) {
    const std::string period = format_month(p.period);
    for (const auto& m : p.members) {
      out << p.id << ',' << period << ',' << companies.at(m.company) << ','
          << csv::format_double(m.weight) << '\n';
    }
  }
}

std::vector<Portfolio> read_portfolios_csv(const std::string& path,
                                           const std::vector<std::string>& companies) {
  std::unordered_map<std::string, std::size_t> company_index;
  for (std::size_t k = 0; k < companies.size(); ++k) company_index.emplace(companies[k], k);

  std::vector<Portfolio> out;
  std::map<std::pair<std::string, int>, std::size_t> index;
  csv::read(path, "portfolio_id,period,company,weight", [&](const auto& f, std::size_t line) {
    MonthId period;
    try {
      period = parse_month(f[1]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(path, line, e.what());
    }
    const auto company = company_index.find(std::string(f[2]));
    if (company == company_index.end()) {
      throw ParseError(path, line, "unknown company '" + std::string(f[2]) + "'");
    }
    const double w = csv::parse_double(f[3], path, line);
    const auto key = std::make_pair(std::string(f[0]), period.value);
    auto [it, inserted] = index.emplace(key, out.size());
    if (inserted) {
      Portfolio p;
      p.id = key.first;
      p.period = period;
      p.origin = p.id.find("/random") != std::string::npos ? Origin::random : Origin::original;
      out.push_back(std::move(p));
    }
    Portfolio& p = out[it->second];
    for (const auto& m : p.members) {
      if (m.company == company->second) {
        throw ConflictError("company '" + std::string(f[2]) + "' listed twice in portfolio '" + p.id + "'");
      }
    }
    p.members.push_back({company->second, w});
    if (w < 0.0) p.kind = PortfolioKind::long_short;
  });
  return out;
}

}  // namespace volrank
