#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <set>

#include "volrank/preprocessing.hpp"
#include "volrank/portfolio.hpp"
#include "volrank/synth.hpp"

using namespace volrank;
namespace fs = std::filesystem;

namespace {

std::vector<double> big_caps(std::size_t n) { return std::vector<double>(n, 1e9); }

Portfolio long_portfolio(std::vector<double> weights) {
  Portfolio p;
  p.id = "src";
  p.period = MonthId::of(2013, 2);
  for (std::size_t i = 0; i < weights.size(); ++i) p.members.push_back({i, weights[i]});
  return p;
}

}  // namespace

TEST(BuildLong, ProportionalWeights) {
  const std::vector<double> x = {1, 2, 3, 0, -1};
  PortfolioRules r;
  r.min_members = 1;
  const BuildResult b = build_long(x, big_caps(5), {}, r);
  ASSERT_TRUE(b.portfolio);
  ASSERT_EQ(b.portfolio->size(), 3u);
  EXPECT_EQ(b.portfolio->members[0].company, 0u);
  EXPECT_DOUBLE_EQ(b.portfolio->members[0].weight, 1.0 / 6);
  EXPECT_DOUBLE_EQ(b.portfolio->members[1].weight, 2.0 / 6);
  EXPECT_DOUBLE_EQ(b.portfolio->members[2].weight, 3.0 / 6);
}

TEST(BuildLong, KeepsLargestCaps) {
  std::vector<double> x(400, 1.0), caps(400);
  for (std::size_t i = 0; i < 400; ++i) caps[i] = 1e9 + 1e6 * static_cast<double>((i * 37) % 400);
  const BuildResult b = build_long(x, caps, {});
  ASSERT_TRUE(b.portfolio);
  ASSERT_EQ(b.portfolio->size(), 300u);
  double smallest_in = 1e300;
  std::set<std::size_t> in;
  for (const auto& m : b.portfolio->members) {
    smallest_in = std::min(smallest_in, caps[m.company]);
    in.insert(m.company);
  }
  for (std::size_t i = 0; i < 400; ++i) {
    if (!in.count(i)) EXPECT_LT(caps[i], smallest_in);
  }
}

TEST(BuildLong, SkipsBelowMinimumAndFiltersCap) {
  std::vector<double> x(39, 1.0);
  EXPECT_FALSE(build_long(x, big_caps(39), {}).portfolio);
  std::vector<double> x40(40, 1.0);
  std::vector<double> caps = big_caps(40);
  caps[3] = 199e6;
  EXPECT_FALSE(build_long(x40, caps, {}).portfolio);
  caps[3] = 200e6;
  EXPECT_TRUE(build_long(x40, caps, {}).portfolio);
  std::vector<bool> cand(40, true);
  cand[0] = false;
  EXPECT_FALSE(build_long(x40, big_caps(40), cand).portfolio);
}

TEST(BuildLongShort, SymmetricLoadingsGiveZeroSum) {
  std::vector<double> x;
  for (int i = 0; i < 40; ++i) x.push_back(0.5 + 0.01 * i);
  for (int i = 0; i < 40; ++i) x.push_back(-(0.5 + 0.01 * i));
  const BuildResult b = build_long_short(x, big_caps(80), {});
  ASSERT_TRUE(b.portfolio);
  for (std::size_t i = 0; i < 40; ++i) {
    EXPECT_EQ(b.portfolio->members[i].weight, -b.portfolio->members[i + 40].weight);
  }
  EXPECT_TRUE(check_invariants(*b.portfolio).empty());
}

TEST(BuildLongShort, NeedsTwentyPerSide) {
  std::vector<double> x(60, 1.0);
  for (int i = 0; i < 19; ++i) x[i] = -1.0;
  EXPECT_FALSE(build_long_short(x, big_caps(60), {}).portfolio);
  x[19] = -1.0;
  EXPECT_TRUE(build_long_short(x, big_caps(60), {}).portfolio);
}

TEST(BuildLongShort, RandomInstancesSatisfyIdentities) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0.0, 1.0);
  std::lognormal_distribution<double> cap(std::log(1e9), 1.2);
  int built = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 40 + trial % 400;
    std::vector<double> x(n), caps(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = trial % 5 == 0 && i % 7 == 0 ? 0.0 : z(rng);
      caps[i] = cap(rng);
    }
    for (const BuildResult& b : {build_long(x, caps, {}), build_long_short(x, caps, {})}) {
      if (!b.portfolio) continue;
      ++built;
      EXPECT_TRUE(check_invariants(*b.portfolio).empty());
    }
  }
  EXPECT_GT(built, 300);
}

TEST(Invariants, ReportViolations) {
  Portfolio p = long_portfolio(std::vector<double>(40, 1.0 / 40));
  p.origin = Origin::original;
  EXPECT_TRUE(check_invariants(p, {}, 1e-12).empty());
  p.members[0].weight = 0.5;
  const auto problems = check_invariants(p);
  ASSERT_EQ(problems.size(), 1u);
  EXPECT_NE(problems[0].find("src"), std::string::npos);
  p.members.resize(10);
  EXPECT_EQ(check_invariants(p).size(), 2u);
  p.origin = Origin::random;
  EXPECT_EQ(check_invariants(p).size(), 1u);
}

TEST(Resample, DominantMemberAlmostAlwaysDrawn) {
  std::vector<double> w(11, 0.001);
  w[4] = 0.99;
  const Portfolio src = long_portfolio(w);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Portfolio r = resample_random(src, seed);
    bool found = false;
    for (const auto& m : r.members) found = found || m.company == 4;
    EXPECT_TRUE(found);
    EXPECT_GE(r.size(), 1u);
    EXPECT_LE(r.size(), 11u);
  }
}

TEST(Resample, WeightsAreDrawFractions) {
  std::vector<double> w(80, 1.0 / 80);
  const Portfolio src = long_portfolio(w);
  const Portfolio r = resample_random(src, 42, 50, 2);
  EXPECT_EQ(r.id, "src/random2");
  EXPECT_EQ(r.origin, Origin::random);
  EXPECT_LE(r.size(), 50u);
  double total = 0;
  for (const auto& m : r.members) {
    const double draws = m.weight * 50.0;
    EXPECT_NEAR(draws, std::round(draws), 1e-9);
    total += m.weight;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  const Portfolio again = resample_random(src, 42, 50, 2);
  ASSERT_EQ(again.size(), r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_EQ(again.members[i].company, r.members[i].company);
    EXPECT_EQ(again.members[i].weight, r.members[i].weight);
  }
}

TEST(Resample, InclusionFrequencyMatchesSamplingProbability) {
  const std::vector<double> w = {0.3, 0.2, 0.15, 0.1, 0.08, 0.06, 0.05, 0.03, 0.02, 0.01};
  const Portfolio src = long_portfolio(w);
  const int n = 10000;
  std::vector<int> hits(w.size(), 0);
  for (int s = 0; s < n; ++s) {
    for (const auto& m : resample_random(src, 1000 + s, 5).members) ++hits[m.company];
  }
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double p = 1.0 - std::pow(1.0 - w[k], 5);
    const double sd = std::sqrt(n * p * (1 - p));
    EXPECT_LE(std::abs(hits[k] - n * p), 3 * sd) << "company " << k;
  }
}

TEST(Resample, LongShortKeepsSidesBalanced) {
  std::vector<double> w;
  for (int i = 0; i < 25; ++i) w.push_back(0.02);
  for (int i = 0; i < 25; ++i) w.push_back(-0.02);
  Portfolio src = long_portfolio(w);
  src.kind = PortfolioKind::long_short;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Portfolio r = resample_random(src, seed);
    EXPECT_EQ(r.kind, PortfolioKind::long_short);
    EXPECT_TRUE(check_invariants(r).empty());
  }
}

TEST(RegionMapTest, StandardMapShape) {
  const RegionMap m = RegionMap::standard();
  EXPECT_EQ(m.entries().size(), 27u);
  EXPECT_EQ(m.regions().size(), 3u);
  EXPECT_EQ(m.subregions().size(), 9u);
  const auto na = m.countries_in(RestrictionType::subregion, "Northern America");
  EXPECT_EQ(std::set<std::string>(na.begin(), na.end()), (std::set<std::string>{"CA", "US"}));
  EXPECT_EQ(m.countries_in(RestrictionType::region, "Europe").size(), 11u);
  for (const auto& code : synth_countries(27)) EXPECT_TRUE(m.entries().count(code)) << code;
}

TEST(RegionMapTest, CsvRoundTrip) {
  const fs::path dir = fs::temp_directory_path() / "volrank_regions";
  fs::create_directories(dir);
  const RegionMap m = RegionMap::standard();
  m.write_csv((dir / "regions.csv").string());
  const RegionMap back = RegionMap::read_csv((dir / "regions.csv").string());
  ASSERT_EQ(back.entries().size(), m.entries().size());
  for (const auto& [c, e] : m.entries()) {
    EXPECT_EQ(back.entries().at(c).region, e.region);
    EXPECT_EQ(back.entries().at(c).subregion, e.subregion);
  }
}

TEST(PortfolioCsv, RoundTrip) {
  const fs::path dir = fs::temp_directory_path() / "volrank_portfolios";
  fs::create_directories(dir);
  const std::vector<std::string> companies = {"A", "B", "C", "D"};
  Portfolio a = long_portfolio({0.25, 0.25, 0.5});
  a.id = "long/x";
  Portfolio b = long_portfolio({0.25, -0.25, 0.25, -0.25});
  b.id = "long_short/y/random1";
  b.kind = PortfolioKind::long_short;
  const Portfolio both[] = {a, b};
  write_portfolios_csv((dir / "p.csv").string(), both, companies);
  const auto back = read_portfolios_csv((dir / "p.csv").string(), companies);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].id, "long/x");
  EXPECT_EQ(back[0].kind, PortfolioKind::long_only);
  EXPECT_EQ(back[1].kind, PortfolioKind::long_short);
  EXPECT_EQ(back[1].origin, Origin::random);
  EXPECT_EQ(back[0].period, a.period);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(back[1].members[i].weight, b.members[i].weight);
}

TEST(Universe, SaturatedCountsAndRegionSoundness) {
  SynthConfig c;
  c.n_companies = 2700;
  c.n_styles = 11;
  c.n_countries = 27;
  c.n_industries = 12;
  c.n_days = 45;
  c.seed = 5;
  const SynthData d = generate(c);
  const PreprocessedPanels pre = apply_preprocessing(d.panels.loadings, d.panels.mcaps, d.panels.returns);
  const RegionMap regions = RegionMap::standard();
  const MonthId period = MonthId::of(2011, 3);
  const PortfolioUniverse u =
      build_universe_of_portfolios(pre.loadings, pre.mcaps, pre.mask, regions, period);
  std::map<std::string, int> cells;
  for (const auto& p : u.portfolios) {
    EXPECT_TRUE(check_invariants(p).empty()) << p.id;
    const std::string kind = p.kind == PortfolioKind::long_only ? "long" : "long_short";
    std::string type = p.basis_kind;
    if (type == "mc") type = "style";
    ++cells[kind + "|" + std::string(to_string(p.restriction.type)) + "|" + type];

    if (p.restriction.type == RestrictionType::unrestricted) continue;
    const auto countries = regions.countries_in(p.restriction.type, p.restriction.name);
    const Eigen::MatrixXd& x = pre.loadings.at(period - 1);
    for (const auto& m : p.members) {
      bool inside = false;
      for (const auto& code : countries) {
        const auto j = pre.loadings.factor_index("country/" + code);
        inside = inside || (j && x(static_cast<Eigen::Index>(m.company), static_cast<Eigen::Index>(*j)) > 0);
      }
      EXPECT_TRUE(inside) << p.id;
    }
  }
  EXPECT_EQ(cells["long|unrestricted|country"], 27);
  EXPECT_EQ(cells["long|unrestricted|industry"], 12);
  EXPECT_EQ(cells["long|unrestricted|style"], 12);
  EXPECT_EQ(cells["long_short|unrestricted|style"], 11);
  EXPECT_EQ(cells["long|region|style"], 36);
  EXPECT_EQ(cells["long_short|region|style"], 33);
  EXPECT_EQ(cells["long|subregion|style"], 9 * 12);
  EXPECT_EQ(cells["long_short|subregion|style"], 9 * 11);
  EXPECT_TRUE(u.skipped.empty());
}
