#pragma once

#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tickpred/ingest.hpp"
#include "tickpred/io.hpp"
#include "tickpred/stats.hpp"

namespace tickpred {

/// One row of the feature table. Metadata and model columns are optional:
/// tick files carry no company data and a stock may be filtered out.
struct FeatureRow {
  std::string stock_code;
  double avgprice = 0.0;
  double volatility = 0.0;
  std::optional<double> life, scale;
  std::optional<int> category, region;
  std::optional<double> acc_mc, acc_dk, pi_max;
};

struct StockMetadata {
  std::optional<double> life, scale;
  std::optional<int> category, region;
};

inline const std::vector<std::string>& feature_columns() {
  static const std::vector<std::string> cols = {"stock_code", "avgprice", "volatility", "life",  "scale",
                                                "category",   "region",   "acc_mc",     "acc_dk", "pi_max"};
  return cols;
}

namespace detail {

inline std::optional<double> parse_optional_double(std::string_view text, const char* what, std::size_t lineno) {
  auto v = trim(text);
  if (v.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    double x = std::stod(std::string(v), &used);
    if (used != v.size() || !std::isfinite(x)) throw std::invalid_argument("junk");
    return x;
  } catch (const std::exception&) {
    throw DataError(std::string("bad ") + what + " value '" + std::string(v) + "' on line " + std::to_string(lineno));
  }
}

inline std::optional<int> parse_optional_index(std::string_view text, const char* what, int hi, std::size_t lineno) {
  auto v = trim(text);
  if (v.empty()) return std::nullopt;
  int x = 0;
  if (!parse_int(v, x) || x < 1 || x > hi)
    throw DataError(std::string(what) + " must be an integer in [1," + std::to_string(hi) + "], got '" +
                    std::string(v) + "' on line " + std::to_string(lineno));
  return x;
}

inline std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }
inline std::string cell(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }

/// Header-driven CSV reader: returns column index by name (npos if absent).
struct HeaderIndex {
  std::vector<std::string> names;
  std::size_t find(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    return std::string_view::npos;
  }
};

inline std::string_view field(const std::vector<std::string_view>& f, std::size_t idx) {
  return idx < f.size() ? f[idx] : std::string_view{};
}

}  // namespace detail

/// Side CSV with a `stock_code` column and any of category, region, scale, life.
inline std::map<std::string, StockMetadata> read_metadata(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("metadata file is empty");
  const char delim = line.find('\t') != std::string::npos ? '\t' : ',';
  detail::HeaderIndex h;
  for (auto f : detail::split(line, delim)) h.names.emplace_back(detail::trim(f));
  const auto ic = h.find("stock_code");
  if (ic == std::string_view::npos) throw DataError("metadata file has no stock_code column");
  const auto icat = h.find("category"), ireg = h.find("region"), isc = h.find("scale"), ilife = h.find("life");

  std::map<std::string, StockMetadata> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    auto f = detail::split(line, delim);
    std::string code(detail::trim(detail::field(f, ic)));
    if (code.empty()) throw DataError("metadata line " + std::to_string(lineno) + " has no stock_code");
    StockMetadata m;
    m.category = detail::parse_optional_index(detail::field(f, icat), "category", 20, lineno);
    m.region = detail::parse_optional_index(detail::field(f, ireg), "region", 32, lineno);
    m.scale = detail::parse_optional_double(detail::field(f, isc), "scale", lineno);
    m.life = detail::parse_optional_double(detail::field(f, ilife), "life", lineno);
    out[code] = m;
  }
  return out;
}

inline void apply_metadata(FeatureRow& row, const std::map<std::string, StockMetadata>& meta) {
  auto it = meta.find(row.stock_code);
  if (it == meta.end()) return;
  row.life = it->second.life;
  row.scale = it->second.scale;
  row.category = it->second.category;
  row.region = it->second.region;
}

inline FeatureRow extract_features(const PriceSeries& series,
                                   VolatilityDenominator denom = VolatilityDenominator::ReturnsMinusOne) {
  FeatureRow row;
  row.stock_code = series.stock_code;
  const auto prices = series.prices_cny();
  row.avgprice = mean(prices);
  row.volatility = volatility(prices, denom);
  return row;
}

inline Table features_table(const std::vector<FeatureRow>& rows) {
  Table t;
  t.header = feature_columns();
  for (const auto& r : rows)
    t.rows.push_back({r.stock_code, format_number(r.avgprice), format_number(r.volatility), detail::cell(r.life),
                      detail::cell(r.scale), detail::cell(r.category), detail::cell(r.region), detail::cell(r.acc_mc),
                      detail::cell(r.acc_dk), detail::cell(r.pi_max)});
  return t;
}

inline std::vector<FeatureRow> read_features(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("feature table is empty");
  detail::HeaderIndex h;
  for (auto f : detail::split(line, ',')) h.names.emplace_back(detail::trim(f));
  std::vector<std::size_t> idx;
  for (const auto& c : feature_columns()) {
    idx.push_back(h.find(c));
    if (idx.back() == std::string_view::npos) throw DataError("feature table lacks column '" + c + "'");
  }
  std::vector<FeatureRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    auto f = detail::split(line, ',');
    FeatureRow r;
    r.stock_code = std::string(detail::trim(detail::field(f, idx[0])));
    auto need = [&](std::size_t k, const char* what) {
      auto v = detail::parse_optional_double(detail::field(f, idx[k]), what, lineno);
      if (!v) throw DataError(std::string("missing ") + what + " on line " + std::to_string(lineno));
      return *v;
    };
    r.avgprice = need(1, "avgprice");
    r.volatility = need(2, "volatility");
    r.life = detail::parse_optional_double(detail::field(f, idx[3]), "life", lineno);
    r.scale = detail::parse_optional_double(detail::field(f, idx[4]), "scale", lineno);
    r.category = detail::parse_optional_index(detail::field(f, idx[5]), "category", 20, lineno);
    r.region = detail::parse_optional_index(detail::field(f, idx[6]), "region", 32, lineno);
    r.acc_mc = detail::parse_optional_double(detail::field(f, idx[7]), "acc_mc", lineno);
    r.acc_dk = detail::parse_optional_double(detail::field(f, idx[8]), "acc_dk", lineno);
    r.pi_max = detail::parse_optional_double(detail::field(f, idx[9]), "pi_max", lineno);
    rows.push_back(std::move(r));
  }
  return rows;
}

struct CorrelationTables {
  Table spearman;
  Table anova;
};

/// Quantitative features against each model column by Spearman, and the
/// categorical ones by one-way ANOVA. Pairs that cannot be computed get an
/// empty statistic and a note rather than aborting the whole table.
inline CorrelationTables correlate(const std::vector<FeatureRow>& rows) {
  using Getter = std::optional<double> (*)(const FeatureRow&);
  const std::vector<std::pair<std::string, Getter>> quantitative = {
      {"life", [](const FeatureRow& r) { return r.life; }},
      {"scale", [](const FeatureRow& r) { return r.scale; }},
      {"avgprice", [](const FeatureRow& r) { return std::optional<double>(r.avgprice); }},
      {"volatility", [](const FeatureRow& r) { return std::optional<double>(r.volatility); }},
  };
  const std::vector<std::pair<std::string, Getter>> targets = {
      {"acc_mc", [](const FeatureRow& r) { return r.acc_mc; }},
      {"acc_dk", [](const FeatureRow& r) { return r.acc_dk; }},
      {"pi_max", [](const FeatureRow& r) { return r.pi_max; }},
  };
  using Factor = std::optional<int> (*)(const FeatureRow&);
  const std::vector<std::pair<std::string, Factor>> factors = {
      {"category", [](const FeatureRow& r) { return r.category; }},
      {"region", [](const FeatureRow& r) { return r.region; }},
  };

  CorrelationTables out;
  out.spearman.header = {"feature", "target", "n", "spearman", "note"};
  for (const auto& [fname, fget] : quantitative) {
    for (const auto& [tname, tget] : targets) {
      std::vector<double> x, y;
      for (const auto& r : rows) {
        auto a = fget(r), b = tget(r);
        if (a && b) {
          x.push_back(*a);
          y.push_back(*b);
        }
      }
      std::string rho, note;
      try {
        rho = format_number(spearman(normalize_minmax(x), y));
      } catch (const Error& e) {
        note = e.what();
      }
      out.spearman.rows.push_back({fname, tname, std::to_string(x.size()), rho, note});
    }
  }

  out.anova.header = {"factor", "target", "groups", "n",     "F",          "p",         "SSB",
                      "SSW",    "SST",    "eta2p",  "note"};
  for (const auto& [fname, fget] : factors) {
    for (const auto& [tname, tget] : targets) {
      std::map<int, std::vector<double>> groups;
      std::size_t n = 0;
      for (const auto& r : rows) {
        auto g = fget(r);
        auto v = tget(r);
        if (g && v) {
          groups[*g].push_back(*v);
          ++n;
        }
      }
      std::vector<std::string> row = {fname, tname, std::to_string(groups.size()), std::to_string(n)};
      try {
        auto a = anova_oneway(groups);
        for (double v : {a.F, a.p, a.SSB, a.SSW, a.SST, a.eta2p}) row.push_back(format_number(v));
        row.emplace_back();
      } catch (const Error& e) {
        row.insert(row.end(), 6, std::string());
        row.emplace_back(e.what());
      }
      out.anova.rows.push_back(std::move(row));
    }
  }
  return out;
}

}  // namespace tickpred
