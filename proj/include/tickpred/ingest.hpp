#pragma once

#include <algorithm>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tickpred/error.hpp"
#include "tickpred/quantize.hpp"
#include "tickpred/series.hpp"

namespace tickpred {

/// A column picked either by header name or by 1-based position.
struct ColumnRef {
  std::string name;
  std::size_t position = 0;  // 1-based; 0 means "use name"

  static ColumnRef parse(std::string_view text) {
    auto s = detail::trim(text);
    ColumnRef ref;
    if (detail::all_digits(s)) {
      detail::parse_int(s, ref.position);
      if (ref.position == 0) throw ConfigError("column positions are 1-based");
    } else {
      ref.name = std::string(s);
    }
    return ref;
  }

  std::string describe() const { return position ? "#" + std::to_string(position) : "'" + name + "'"; }
};

struct TickSchema {
  ColumnRef code = ColumnRef::parse("1");
  ColumnRef time = ColumnRef::parse("2");
  ColumnRef price = ColumnRef::parse("3");  // last price, or another target such as turnover
  std::vector<ColumnRef> extra;
  char delimiter = 0;  // 0 = detect from the header line
};

struct ParseResult {
  std::vector<TickRecord> records;
  std::size_t malformed = 0;
};

namespace detail {

inline std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(delim, start);
    fields.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

inline std::size_t resolve(const ColumnRef& ref, const std::vector<std::string_view>& header) {
  if (ref.position) {
    if (ref.position > header.size())
      throw ConfigError("column " + ref.describe() + " is past the last header column (" +
                        std::to_string(header.size()) + ")");
    return ref.position - 1;
  }
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == ref.name) return i;
  throw ConfigError("column " + ref.describe() + " not found in header");
}

}  // namespace detail

/// Reads delimiter-separated tick rows (header first). Rows with a missing
/// field, an unparseable timestamp or a non-positive price are skipped and
/// counted in `malformed`.
inline ParseResult parse_ticks(std::istream& in, const TickSchema& schema) {
  std::string line;
  bool have_header = false;
  while (!have_header && std::getline(in, line)) have_header = !detail::trim(line).empty();
  if (!have_header) throw DataError("empty input: no header row");

  char delim = schema.delimiter;
  if (delim == 0) delim = line.find('\t') != std::string::npos ? '\t' : ',';
  auto header = detail::split(line, delim);
  if (!line.empty() && static_cast<unsigned char>(line[0]) == 0xEF && !header.empty() && header[0].size() >= 3)
    header[0].remove_prefix(3);  // UTF-8 BOM

  const auto code_col = detail::resolve(schema.code, header);
  const auto time_col = detail::resolve(schema.time, header);
  const auto price_col = detail::resolve(schema.price, header);
  std::vector<std::pair<std::string, std::size_t>> extra_cols;
  for (const auto& ref : schema.extra)
    extra_cols.emplace_back(ref.position ? std::string(header[detail::resolve(ref, header)]) : ref.name,
                            detail::resolve(ref, header));
  const auto needed = std::max({code_col, time_col, price_col}) + 1;

  ParseResult result;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split(line, delim);
    if (fields.size() < needed || fields[code_col].empty()) {
      ++result.malformed;
      continue;
    }
    auto ts = parse_timestamp(fields[time_col]);
    auto price = parse_price(fields[price_col]);
    if (!ts || !price || price->hundredths <= 0) {
      ++result.malformed;
      continue;
    }
    TickRecord rec{std::string(fields[code_col]), *ts, *price, {}};
    for (const auto& [name, col] : extra_cols) {
      if (col < fields.size())
        if (auto v = parse_hundredths(fields[col])) rec.extra[name] = static_cast<double>(*v) / 100.0;
    }
    result.records.push_back(std::move(rec));
  }
  if (result.records.empty()) throw DataError("empty input: no parseable tick rows");
  return result;
}

/// Groups records per stock, orders them by timestamp (stable, so equal
/// timestamps keep input order) and marks calendar-day starts.
inline std::map<std::string, PriceSeries> build_series(const std::vector<TickRecord>& records) {
  std::map<std::string, PriceSeries> out;
  for (const auto& r : records) {
    auto& s = out[r.stock_code];
    s.stock_code = r.stock_code;
    s.points.push_back({r.timestamp, r.last_price});
  }
  for (auto& [code, s] : out) {
    std::stable_sort(s.points.begin(), s.points.end(),
                     [](const PricePoint& a, const PricePoint& b) { return a.timestamp < b.timestamp; });
    s.detect_days();
  }
  return out;
}

struct FilterDecision {
  bool keep = true;
  std::string reason;  // empty when kept
  std::size_t length = 0;
  std::size_t distinct_states = 0;
};

inline constexpr std::size_t kDefaultMinLength = 1000;
inline constexpr std::size_t kDefaultMinStates = 10;

inline FilterDecision filter_series(const PriceSeries& series, const QuantizationScheme& scheme,
                                    std::size_t min_length = kDefaultMinLength,
                                    std::size_t min_states = kDefaultMinStates) {
  FilterDecision d;
  d.length = series.size();
  d.distinct_states = quantize_with(series, scheme).n_distinct;
  if (d.length < min_length) {
    d.keep = false;
    d.reason = "too short";
  } else if (d.distinct_states < min_states) {
    d.keep = false;
    d.reason = "too few states";
  }
  return d;
}

}  // namespace tickpred
