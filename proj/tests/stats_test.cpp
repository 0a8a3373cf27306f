#include <cmath>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "tickpred/stats.hpp"

using namespace tickpred;

TEST(Volatility, Examples) {
  std::vector<double> flat(10, 12.5);
  EXPECT_EQ(volatility(flat), 0.0);
  const double e = std::exp(1.0);
  std::vector<double> alt = {1, e, 1, e, 1};
  EXPECT_NEAR(volatility(alt), std::sqrt(4.0 / 3.0), 1e-12);
  EXPECT_NEAR(volatility(alt, VolatilityDenominator::PricesMinusOne), 1.0, 1e-12);
}

TEST(Volatility, Errors) {
  std::vector<double> two = {1, 2};
  EXPECT_THROW(volatility(two), DataError);
  std::vector<double> neg = {1, 0, 2};
  EXPECT_THROW(volatility(neg), DataError);
}

TEST(Volatility, ScaleInvariance) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(1.0, 100.0), k(0.01, 1000.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(3 + trial % 50);
    for (auto& x : p) x = u(rng);
    const double f = k(rng);
    auto q = p;
    for (auto& x : q) x *= f;
    EXPECT_NEAR(volatility(q), volatility(p), 1e-10);
  }
}

TEST(Spearman, Examples) {
  std::vector<double> x = {1, 2, 3};
  EXPECT_NEAR(spearman(x, std::vector<double>{10, 20, 30}), 1.0, 1e-15);
  EXPECT_NEAR(spearman(x, std::vector<double>{30, 20, 10}), -1.0, 1e-15);
  // average ranks (1, 2.5, 2.5, 4) vs (1, 3, 2, 4): 4.5 / sqrt(4.5 * 5) = 3 / sqrt(10)
  std::vector<double> a = {1, 2, 2, 4}, b = {1, 3, 2, 4};
  EXPECT_NEAR(spearman(a, b), 3.0 / std::sqrt(10.0), 1e-12);
}

TEST(Spearman, MatchesScipyReference) {
  // scipy.stats.spearmanr on these vectors: -0.16363636363636364 and 0.024316221747202587
  std::vector<double> v1 = {17, 86, 60, 77, 47, 3, 70, 87, 88, 92};
  std::vector<double> v2 = {70, 29, 85, 61, 80, 34, 60, 31, 73, 66};
  EXPECT_NEAR(spearman(v1, v2), -0.16363636363636364, 1e-12);
  std::vector<double> v3 = {17, 86, 60, 77, 47, 3, 70, 47, 88, 92};
  EXPECT_NEAR(spearman(v3, v2), 0.024316221747202587, 1e-12);
}

TEST(Spearman, Errors) {
  std::vector<double> x = {1, 2, 3}, y = {1, 2};
  EXPECT_THROW(spearman(x, y), DataError);
  std::vector<double> c = {5, 5, 5};
  EXPECT_THROW(spearman(x, c), DataError);
}

TEST(Spearman, RankInvarianceProperty) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> x(5 + trial % 40), y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = std::round(u(rng) * 4) / 4;  // plenty of ties
      y[i] = x[i] + u(rng);
    }
    std::vector<double> fx;
    for (double v : x) fx.push_back(std::exp(v) + 3 * v);
    EXPECT_NEAR(spearman(fx, y), spearman(x, y), 1e-12);
    EXPECT_NEAR(spearman(normalize_minmax(x), y), spearman(x, y), 1e-12);
  }
}

TEST(Anova, IdenticalGroupsGiveZeroF) {
  std::map<int, std::vector<double>> g = {{1, {2, 3, 4}}, {2, {2, 3, 4}}};
  auto r = anova_oneway(g);
  EXPECT_EQ(r.SSB, 0.0);
  EXPECT_EQ(r.F, 0.0);
  EXPECT_NEAR(r.p, 1.0, 1e-12);
}

TEST(Anova, HandDecomposition) {
  std::map<std::string, std::vector<double>> g = {{"a", {1, 2, 3}}, {"b", {4, 5, 6}}};
  auto r = anova_oneway(g);
  EXPECT_NEAR(r.SSB, 13.5, 1e-12);
  EXPECT_NEAR(r.SSW, 4.0, 1e-12);
  EXPECT_NEAR(r.SST, 17.5, 1e-12);
  EXPECT_NEAR(r.F, 13.5, 1e-9);
  EXPECT_NEAR(r.p, 0.02131164112875672, 1e-8);  // scipy.stats.f_oneway
  EXPECT_NEAR(r.eta2p, 13.5 / 17.5, 1e-15);
  EXPECT_EQ(r.df_between, 1u);
  EXPECT_EQ(r.df_within, 4u);
}

TEST(Anova, EtaSquaredFromPublishedSums) { EXPECT_NEAR(eta_squared(0.676, 67.768), 0.00998, 1e-5); }

TEST(Anova, DecompositionProperty) {
  std::mt19937_64 rng(44);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::map<int, std::vector<double>> g;
    const int k = 2 + trial % 8;
    for (int gi = 0; gi < k; ++gi)
      for (int i = 0; i < 1 + (trial + gi) % 6; ++i) g[gi].push_back(nd(rng) + 0.3 * gi);
    std::size_t n = 0;
    for (auto& [key, v] : g) n += v.size();
    if (n <= static_cast<std::size_t>(k)) continue;
    auto r = anova_oneway(g);
    EXPECT_NEAR(r.SST, r.SSB + r.SSW, 1e-9 * std::max(1.0, r.SST));
    EXPECT_LE(r.SSB, r.SST + 1e-12);
    EXPECT_GE(r.eta2p, 0.0);
    EXPECT_LE(r.eta2p, 1.0);
    EXPECT_GE(r.F, 0.0);
    EXPECT_GE(r.p, 0.0);
    EXPECT_LE(r.p, 1.0);
  }
}

TEST(Anova, Degenerate) {
  std::map<int, std::vector<double>> one = {{1, {1, 2}}};
  EXPECT_THROW(anova_oneway(one), DataError);
  std::map<int, std::vector<double>> empty_group = {{1, {1, 2}}, {2, {}}};
  EXPECT_THROW(anova_oneway(empty_group), DataError);
  std::map<int, std::vector<double>> singletons = {{1, {1}}, {2, {2}}};
  EXPECT_THROW(anova_oneway(singletons), DataError);
}

TEST(BinFeature, PublishedEdges) {
  EXPECT_EQ(bin_index(3.5, kPriceBinEdges), 2u);
  EXPECT_EQ(bin_index(0.08, kVolatilityBinEdges), 9u);
  EXPECT_EQ(bin_index(-1.0, kPriceBinEdges), 1u);
  EXPECT_EQ(bin_index(3.0, kPriceBinEdges), 2u);
  EXPECT_EQ(bin_index(2999.0, kPriceBinEdges), 11u);
  EXPECT_EQ(bin_index(15000.0, kScaleBinEdges), 10u);
  std::vector<double> none;
  EXPECT_THROW(bin_index(1.0, none), ConfigError);
  std::vector<double> bad = {0, 2, 1};
  EXPECT_THROW(bin_feature(std::vector<double>{1.0}, bad), ConfigError);
}

TEST(BinFeature, TotalOverFiniteValues) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  std::vector<double> v(5000);
  for (auto& x : v) x = u(rng);
  for (auto idx : bin_feature(v, kVolatilityBinEdges)) {
    EXPECT_GE(idx, 1u);
    EXPECT_LE(idx, kVolatilityBinEdges.size());
  }
}

TEST(NormalizeMinMax, Examples) {
  EXPECT_EQ(normalize_minmax(std::vector<double>{0, 5, 10}), (std::vector<double>{0, 0.5, 1}));
  EXPECT_EQ(normalize_minmax(std::vector<double>{7, 7}), (std::vector<double>{0.5, 0.5}));
}
