#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/fisher_f.hpp>

#include "tickpred/error.hpp"

namespace tickpred {

struct StockFeatures {
  std::string stock_code;
  double avgprice = 0.0;
  double volatility = 0.0;
  double life = 0.0;   // years listed
  double scale = 0.0;  // employees
  int category = 0;    // industry index 1-20, 0 when unknown
  int region = 0;      // region index 1-32, 0 when unknown
};

inline double mean(std::span<const double> v) {
  if (v.empty()) throw DataError("mean of an empty list");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// How the sample variance of log-returns is normalised. With M returns,
/// ReturnsMinusOne divides by M - 1; PricesMinusOne reads N as the price
/// count and divides by N - 1 = M.
enum class VolatilityDenominator { ReturnsMinusOne, PricesMinusOne };

/// Historical volatility: sample standard deviation of ln(P_t / P_{t-1}).
inline double volatility(std::span<const double> prices,
                         VolatilityDenominator denom = VolatilityDenominator::ReturnsMinusOne) {
  if (prices.size() < 3) throw DataError("volatility needs at least 3 prices");
  for (double p : prices)
    if (!(p > 0.0)) throw DataError("volatility of a non-positive price");
  std::vector<double> returns(prices.size() - 1);
  for (std::size_t t = 1; t < prices.size(); ++t) returns[t - 1] = std::log(prices[t] / prices[t - 1]);
  const double xbar = mean(returns);
  double ss = 0.0;
  for (double x : returns) ss += (x - xbar) * (x - xbar);
  const double m = static_cast<double>(returns.size());
  return std::sqrt(ss / (denom == VolatilityDenominator::ReturnsMinusOne ? m - 1.0 : m));
}

/// Ranks 1..n with ties replaced by their average rank.
inline std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("correlation of lists with different lengths");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw DataError("correlation undefined: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Spearman's rho as the Pearson correlation of average ranks.
inline double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw DataError("spearman: length mismatch (" + std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
  if (x.size() < 3) throw DataError("spearman needs at least 3 pairs");
  auto rx = average_ranks(x);
  auto ry = average_ranks(y);
  return pearson(rx, ry);
}

struct AnovaResult {
  double F = 0.0;
  double p = 1.0;
  double SSB = 0.0;
  double SSW = 0.0;
  double SST = 0.0;
  double eta2p = 0.0;
  std::size_t df_between = 0;
  std::size_t df_within = 0;
};

/// Partial eta squared from the sums of squares.
inline double eta_squared(double ssb, double sst) {
  if (!(sst > 0.0)) return 0.0;
  return ssb / sst;
}

/// One-way ANOVA. Groups are keyed by any ordered id; iteration order of
/// the map fixes the summation order.
template <class Key>
AnovaResult anova_oneway(const std::map<Key, std::vector<double>>& groups) {
  if (groups.size() < 2) throw DataError("ANOVA needs at least 2 groups");
  std::size_t n = 0;
  double grand = 0.0;
  for (const auto& [k, g] : groups) {
    if (g.empty()) throw DataError("ANOVA group is empty");
    n += g.size();
    grand += std::accumulate(g.begin(), g.end(), 0.0);
  }
  const std::size_t k = groups.size();
  if (n <= k) throw DataError("ANOVA needs more observations than groups");
  grand /= static_cast<double>(n);

  AnovaResult r;
  for (const auto& [key, g] : groups) {
    const double gm = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
    r.SSB += static_cast<double>(g.size()) * (gm - grand) * (gm - grand);
    for (double v : g) {
      r.SSW += (v - gm) * (v - gm);
      r.SST += (v - grand) * (v - grand);
    }
  }
  r.df_between = k - 1;
  r.df_within = n - k;
  r.eta2p = eta_squared(r.SSB, r.SST);
  const double msb = r.SSB / static_cast<double>(r.df_between);
  const double msw = r.SSW / static_cast<double>(r.df_within);
  if (msw > 0.0) {
    r.F = msb / msw;
    boost::math::fisher_f dist(static_cast<double>(r.df_between), static_cast<double>(r.df_within));
    r.p = boost::math::cdf(boost::math::complement(dist, r.F));
  } else {
    // No within-group spread: any between-group difference is decisive.
    r.F = r.SSB > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    r.p = r.SSB > 0.0 ? 0.0 : 1.0;
  }
  return r;
}

/// 1-based half-open binning [e_k, e_{k+1}); values below the first edge go
/// to bin 1 and the last bin is open above.
inline std::size_t bin_index(double value, std::span<const double> edges) {
  if (edges.empty()) throw ConfigError("bin edges are empty");
  auto it = std::upper_bound(edges.begin(), edges.end(), value);
  auto idx = static_cast<std::size_t>(it - edges.begin());
  return std::max<std::size_t>(idx, 1);
}

inline std::vector<std::size_t> bin_feature(std::span<const double> values, std::span<const double> edges) {
  if (edges.empty()) throw ConfigError("bin edges are empty");
  for (std::size_t k = 1; k < edges.size(); ++k)
    if (!(edges[k] > edges[k - 1])) throw ConfigError("bin edges must be strictly increasing");
  std::vector<std::size_t> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(bin_index(v, edges));
  return out;
}

// Lower edges of the published feature bins for average price (CNY), volatility and
// company scale (employees).
inline constexpr std::array<double, 11> kPriceBinEdges = {0, 3, 4, 5, 6, 8, 10, 13, 17, 25, 50};
inline constexpr std::array<double, 9> kVolatilityBinEdges = {0, 0.01, 0.016, 0.021, 0.027, 0.033, 0.04, 0.05, 0.07};
inline constexpr std::array<double, 10> kScaleBinEdges = {0, 500, 1000, 1500, 2000, 2500, 3500, 5000, 8000, 15000};

/// Min-max scaling to [0, 1]; a constant list maps to 0.5 everywhere.
inline std::vector<double> normalize_minmax(std::span<const double> values) {
  if (values.empty()) return {};
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo, range = *hi - *lo;
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(range > 0.0 ? (v - min) / range : 0.5);
  return out;
}

}  // namespace tickpred
