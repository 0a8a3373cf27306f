#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "tickpred/error.hpp"
#include "tickpred/series.hpp"

namespace tickpred {

using StateId = std::int64_t;

enum class QuantizationMode { FixedInterval, FixedStateCount };

/// Price-to-state mapping. The bin width is kept as the exact rational
/// width_num / width_den hundredths, so a fixed-count scheme derived from a
/// training range bins exactly like the integer arithmetic of a fixed
/// interval.
class QuantizationScheme {
 public:
  static QuantizationScheme fixed_interval(Price interval) {
    if (interval.hundredths < 1)
      throw ConfigError("quantification interval must be at least 0.01, got " + format_price(interval));
    QuantizationScheme q;
    q.mode_ = QuantizationMode::FixedInterval;
    q.width_num_ = interval.hundredths;
    q.width_den_ = 1;
    return q;
  }

  /// Interval given in CNY; must be a whole number of hundredths.
  static QuantizationScheme fixed_interval_cny(double interval) {
    double h = interval * 100.0;
    auto rounded = std::llround(h);
    if (!std::isfinite(h) || std::abs(h - static_cast<double>(rounded)) > 1e-6)
      throw ConfigError("quantification interval must be a multiple of 0.01, got " + std::to_string(interval));
    return fixed_interval(Price{rounded});
  }

  /// Scheme with `state_count` bins spanning [low, high] of a training slice.
  static QuantizationScheme fixed_state_count(std::int64_t state_count, Price low, Price high) {
    if (state_count < 2) throw ConfigError("state count must be at least 2");
    if (high <= low) throw DataError("training price range is degenerate (max == min)");
    QuantizationScheme q;
    q.mode_ = QuantizationMode::FixedStateCount;
    q.width_num_ = high.hundredths - low.hundredths;
    q.width_den_ = state_count;
    q.origin_ = low;
    return q;
  }

  QuantizationMode mode() const { return mode_; }
  Price origin() const { return origin_; }
  std::int64_t state_count() const { return mode_ == QuantizationMode::FixedStateCount ? width_den_ : 0; }
  std::int64_t width_numerator() const { return width_num_; }
  std::int64_t width_denominator() const { return width_den_; }

  /// Bin width in CNY (T, or the derived T of a fixed-count scheme).
  double interval_cny() const { return static_cast<double>(width_num_) / static_cast<double>(width_den_) / 100.0; }

  StateId state_of(Price p) const {
    return bin((p.hundredths - origin_.hundredths) * width_den_, width_num_);
  }

  /// Same binning for an arbitrary CNY value, resolved to 1e-4 CNY.
  StateId state_of(double cny) const {
    auto q = std::llround(cny * 10000.0);
    return bin((q - origin_.hundredths * 100) * width_den_, width_num_ * 100);
  }

  /// Midpoint of the state's price interval, in CNY.
  double representative(StateId state) const {
    double h = static_cast<double>(origin_.hundredths) +
               (static_cast<double>(state) + 0.5) * static_cast<double>(width_num_) / static_cast<double>(width_den_);
    return h / 100.0;
  }

  /// Short label used in reports: "T=0.05" or "SP=100".
  std::string label() const {
    if (mode_ == QuantizationMode::FixedStateCount) return "SP=" + std::to_string(width_den_);
    return "T=" + format_price(Price{width_num_});
  }

  friend bool operator==(const QuantizationScheme&, const QuantizationScheme&) = default;

 private:
  QuantizationScheme() = default;

  static StateId bin(std::int64_t numer, std::int64_t denom) {
    if (numer <= 0) return 0;  // clamp below the origin
    return numer / denom;
  }

  QuantizationMode mode_ = QuantizationMode::FixedInterval;
  std::int64_t width_num_ = 1;
  std::int64_t width_den_ = 1;
  Price origin_{0};
};

inline std::size_t count_distinct(std::span<const StateId> states) {
  std::unordered_set<StateId> seen(states.begin(), states.end());
  return seen.size();
}

struct QuantizedSequence {
  std::vector<StateId> states;
  QuantizationScheme scheme = QuantizationScheme::fixed_interval(Price{1});
  std::size_t n_distinct = 0;

  std::size_t size() const { return states.size(); }
};

inline QuantizedSequence quantize_with(const PriceSeries& series, const QuantizationScheme& scheme) {
  QuantizedSequence out;
  out.scheme = scheme;
  out.states.reserve(series.size());
  for (const auto& p : series.points) out.states.push_back(scheme.state_of(p.price));
  out.n_distinct = count_distinct(out.states);
  return out;
}

inline QuantizedSequence quantize_fixed(const PriceSeries& series, Price interval) {
  return quantize_with(series, QuantizationScheme::fixed_interval(interval));
}

/// Anchors SP bins to the price range of points [0, train_end); later prices
/// above that range map to ids beyond SP-1, prices below it to 0.
inline QuantizedSequence quantize_fixed_count(const PriceSeries& series, std::int64_t state_count,
                                              std::size_t train_end) {
  if (train_end < 2 || train_end > series.size())
    throw DataError("training slice for fixed state count must hold at least 2 points");
  auto [lo, hi] = std::minmax_element(series.points.begin(), series.points.begin() + static_cast<std::ptrdiff_t>(train_end),
                                      [](const PricePoint& a, const PricePoint& b) { return a.price < b.price; });
  return quantize_with(series, QuantizationScheme::fixed_state_count(state_count, lo->price, hi->price));
}

inline double dequantize(StateId state, const QuantizationScheme& scheme) { return scheme.representative(state); }

}  // namespace tickpred
