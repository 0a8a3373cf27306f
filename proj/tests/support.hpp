// Test-only helpers: independent oracles and seeded synthetic sources.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tickpred/quantize.hpp"
#include "tickpred/series.hpp"

namespace tickpred::testkit {

/// Literal reading of the match-length definition: try k = 1, 2, ... and
/// search every window of length k inside states[0, i). Cubic.
inline std::vector<std::uint32_t> naive_match_lengths(std::span<const StateId> s) {
  const std::size_t n = s.size();
  std::vector<std::uint32_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t k = 1;
    for (;; ++k) {
      if (i + k > n) break;  // ran past the end: lambda = tail + 1
      bool found = false;
      for (std::size_t j = 0; j + k <= i && !found; ++j) {
        bool eq = true;
        for (std::size_t m = 0; m < k && eq; ++m) eq = s[j + m] == s[i + m];
        found = eq;
      }
      if (!found) break;
    }
    out[i] = static_cast<std::uint32_t>(k);
  }
  return out;
}

inline std::vector<StateId> random_states(std::mt19937_64& rng, std::size_t n, StateId alphabet) {
  std::uniform_int_distribution<StateId> d(0, alphabet - 1);
  std::vector<StateId> s(n);
  for (auto& x : s) x = d(rng);
  return s;
}

/// Second-order Markov source over `k` states. Each context has one
/// dominant successor with probability in [0.5, 0.8]; the rest of the mass
/// is spread with random weights.
struct Order2Source {
  std::size_t k = 5;
  std::vector<std::vector<double>> rows;  // row index = prev2 * k + prev1

  static Order2Source make(std::mt19937_64& rng, std::size_t k = 5) {
    Order2Source src;
    src.k = k;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    for (std::size_t c = 0; c < k * k; ++c) {
      std::vector<double> row(k);
      const std::size_t dom = pick(rng);
      const double p_dom = 0.5 + 0.3 * u(rng);
      double rest = 0.0;
      for (std::size_t j = 0; j < k; ++j)
        if (j != dom) rest += (row[j] = 0.05 + u(rng));
      for (std::size_t j = 0; j < k; ++j) row[j] = j == dom ? p_dom : (1.0 - p_dom) * row[j] / rest;
      src.rows.push_back(std::move(row));
    }
    return src;
  }

  std::vector<StateId> sample(std::mt19937_64& rng, std::size_t n) const {
    std::vector<StateId> s(n);
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    s[0] = static_cast<StateId>(pick(rng));
    s[1] = static_cast<StateId>(pick(rng));
    for (std::size_t t = 2; t < n; ++t) {
      const auto& row = rows[static_cast<std::size_t>(s[t - 2]) * k + static_cast<std::size_t>(s[t - 1])];
      std::discrete_distribution<std::size_t> d(row.begin(), row.end());
      s[t] = static_cast<StateId>(d(rng));
    }
    return s;
  }

  /// Entropy rate in bits: stationary context distribution (power
  /// iteration) weighted by each row's entropy.
  double entropy_rate() const {
    const std::size_t m = k * k;
    std::vector<double> pi(m, 1.0 / static_cast<double>(m));
    for (int it = 0; it < 5000; ++it) {
      std::vector<double> next(m, 0.0);
      for (std::size_t c = 0; c < m; ++c)
        for (std::size_t j = 0; j < k; ++j) next[(c % k) * k + j] += pi[c] * rows[c][j];
      pi = std::move(next);
    }
    double h = 0.0;
    for (std::size_t c = 0; c < m; ++c)
      for (double p : rows[c])
        if (p > 0) h -= pi[c] * p * std::log2(p);
    return h;
  }
};

/// Day boundaries for `days` equal-length days over n points.
inline std::vector<std::size_t> equal_days(std::size_t n, std::size_t days) {
  std::vector<std::size_t> b;
  for (std::size_t d = 0; d < days; ++d) b.push_back(d * n / days);
  return b;
}

/// Seeded tick-level random walk: each step moves the price by -2..+2
/// hundredths (weights 1,2,4,2,1), reflecting at 1.00 CNY. Points are three
/// seconds apart, `per_day` per calendar day starting 2021-01-04 09:30.
inline PriceSeries random_walk_series(std::mt19937_64& rng, std::string code, std::size_t days,
                                      std::size_t per_day, std::int64_t start_hundredths = 1000) {
  PriceSeries s;
  s.stock_code = std::move(code);
  std::discrete_distribution<int> step({1, 2, 4, 2, 1});
  std::int64_t price = start_hundredths;
  const EpochSeconds day0 = 1609752600;  // 2021-01-04 09:30:00
  for (std::size_t d = 0; d < days; ++d) {
    for (std::size_t i = 0; i < per_day; ++i) {
      price += step(rng) - 2;
      if (price < 100) price = 200 - price;
      s.points.push_back({day0 + static_cast<EpochSeconds>(d) * kSecondsPerDay + static_cast<EpochSeconds>(3 * i),
                          Price{price}});
    }
  }
  s.detect_days();
  return s;
}

}  // namespace tickpred::testkit
