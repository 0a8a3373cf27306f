#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "tickpred/error.hpp"
#include "tickpred/price.hpp"

namespace tickpred {

/// One exchange snapshot reduced to the fields the pipeline uses.
struct TickRecord {
  std::string stock_code;
  EpochSeconds timestamp = 0;
  Price last_price;
  std::map<std::string, double> extra;  // pass-through columns, usually empty
};

struct PricePoint {
  EpochSeconds timestamp = 0;
  Price price;

  friend bool operator==(const PricePoint&, const PricePoint&) = default;
};

/// Per-stock last-price series with all trading days concatenated.
/// day_boundaries[k] is the index of the first point of day k; it always
/// starts with 0 when the series is non-empty.
struct PriceSeries {
  std::string stock_code;
  std::vector<PricePoint> points;
  std::vector<std::size_t> day_boundaries;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  std::size_t day_count() const { return day_boundaries.size(); }

  std::vector<double> prices_cny() const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(p.price.cny());
    return out;
  }

  /// Recomputes day_boundaries from calendar-date changes between points.
  void detect_days() {
    day_boundaries.clear();
    for (std::size_t i = 0; i < points.size(); ++i)
      if (i == 0 || day_number(points[i].timestamp) != day_number(points[i - 1].timestamp))
        day_boundaries.push_back(i);
  }

  friend bool operator==(const PriceSeries&, const PriceSeries&) = default;
};

// Interchange format: header "epoch_seconds,price_hundredths", then one
// point per line. Day boundaries are recovered from the timestamps.

inline void write_series(std::ostream& out, const PriceSeries& series) {
  out << "epoch_seconds,price_hundredths\n";
  for (const auto& p : series.points) out << p.timestamp << ',' << p.price.hundredths << '\n';
}

inline PriceSeries read_series(std::istream& in, std::string stock_code) {
  PriceSeries series;
  series.stock_code = std::move(stock_code);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto view = detail::trim(line);
    if (view.empty()) continue;
    if (lineno == 1 && !view.empty() && (view.front() < '0' || view.front() > '9') && view.front() != '-')
      continue;  // header
    auto comma = view.find(',');
    if (comma == std::string_view::npos)
      throw DataError("series " + series.stock_code + ": line " + std::to_string(lineno) + " has no comma");
    EpochSeconds t = 0;
    std::int64_t h = 0;
    if (!detail::parse_int(detail::trim(view.substr(0, comma)), t) ||
        !detail::parse_int(detail::trim(view.substr(comma + 1)), h) || h <= 0)
      throw DataError("series " + series.stock_code + ": malformed line " + std::to_string(lineno));
    series.points.push_back({t, Price{h}});
  }
  series.detect_days();
  return series;
}

}  // namespace tickpred
