#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "tickpred/diffusion_kernel.hpp"
#include "tickpred/evaluate.hpp"
#include "tickpred/ingest.hpp"
#include "tickpred/io.hpp"
#include "tickpred/protocol.hpp"
#include "tickpred/stats.hpp"

#ifndef TICKPRED_VERSION
#define TICKPRED_VERSION "0.0.0"
#endif

namespace tickpred {

/// One quantization setting of a run: a fixed interval T (hundredths) or a
/// fixed state count SP fitted on the training days.
struct QuantizationSetting {
  QuantizationMode mode = QuantizationMode::FixedInterval;
  std::int64_t value = 1;  // hundredths for T, state count for SP

  std::string label() const {
    return mode == QuantizationMode::FixedInterval ? "T=" + format_price(Price{value}) : "SP=" + std::to_string(value);
  }
  friend bool operator==(const QuantizationSetting&, const QuantizationSetting&) = default;
};

struct PipelineConfig {
  std::vector<std::string> inputs;
  std::string column_code = "1";
  std::string column_time = "2";
  std::string column_price = "3";
  std::string delimiter = "auto";  // auto | comma | tab
  std::vector<std::int64_t> intervals = {1, 5};
  std::vector<std::int64_t> state_counts;
  std::size_t min_length = kDefaultMinLength;
  std::size_t min_states = kDefaultMinStates;
  std::vector<ModelKind> models = {ModelKind::MC, ModelKind::DK};
  std::optional<std::uint64_t> seed = 42;
  DiffusionKernelConfig dk;
  std::size_t train_days = 1;
  RmseTruth rmse_truth = RmseTruth::Raw;
  VolatilityDenominator volatility_denominator = VolatilityDenominator::ReturnsMinusOne;
  std::string metadata;
  std::string feature_setting;  // empty: first setting
  std::string output_dir = "out";
  std::size_t threads = 0;  // 0: hardware concurrency
  bool json = false;

  std::vector<QuantizationSetting> settings() const {
    std::vector<QuantizationSetting> s;
    for (auto t : intervals) s.push_back({QuantizationMode::FixedInterval, t});
    for (auto sp : state_counts) s.push_back({QuantizationMode::FixedStateCount, sp});
    return s;
  }

  bool uses(ModelKind k) const { return std::find(models.begin(), models.end(), k) != models.end(); }

  std::string effective_feature_setting() const {
    if (!feature_setting.empty()) return feature_setting;
    auto s = settings();
    return s.empty() ? std::string() : s.front().label();
  }

  void validate() const {
    if (settings().empty()) throw ConfigError("at least one quantization setting (intervals or state_counts) is required");
    for (auto t : intervals)
      if (t < 1) throw ConfigError("intervals must be at least 0.01");
    for (auto sp : state_counts)
      if (sp < 2) throw ConfigError("state_counts must be at least 2");
    if (models.empty()) throw ConfigError("models must name at least one of MC, DK");
    if (uses(ModelKind::DK) && !seed) throw ConfigError("seed is required when the DK model is enabled");
    if (uses(ModelKind::DK)) dk.validate();
    if (train_days < 1) throw ConfigError("train_days must be at least 1");
    if (min_length < 3) throw ConfigError("min_length must be at least 3");
    if (delimiter != "auto" && delimiter != "comma" && delimiter != "tab")
      throw ConfigError("delimiter must be auto, comma or tab");
    if (output_dir.empty()) throw ConfigError("output_dir is empty");
    bool found = feature_setting.empty();
    for (const auto& s : settings()) found = found || s.label() == feature_setting;
    if (!found) throw ConfigError("feature_setting '" + feature_setting + "' is not one of the configured settings");
  }

  TickSchema schema() const {
    TickSchema s;
    s.code = ColumnRef::parse(column_code);
    s.time = ColumnRef::parse(column_time);
    s.price = ColumnRef::parse(column_price);
    s.delimiter = delimiter == "comma" ? ',' : delimiter == "tab" ? '\t' : 0;
    return s;
  }
};

namespace detail {

inline std::vector<std::string> split_list(std::string_view v) {
  std::vector<std::string> out;
  for (auto part : split(v, ',')) {
    auto t = trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

template <class T>
T parse_number(std::string_view key, std::string_view v) {
  T x{};
  if constexpr (std::is_floating_point_v<T>) {
    try {
      std::size_t used = 0;
      x = static_cast<T>(std::stod(std::string(v), &used));
      if (used != v.size()) throw std::invalid_argument("junk");
    } catch (const std::exception&) {
      throw ConfigError(std::string(key) + ": not a number: '" + std::string(v) + "'");
    }
  } else if (!parse_int(trim(v), x)) {
    throw ConfigError(std::string(key) + ": not a non-negative integer: '" + std::string(v) + "'");
  }
  return x;
}

inline bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(std::string(key) + ": expected true or false, got '" + std::string(v) + "'");
}

inline std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

}  // namespace detail

/// Sets one key. Unknown keys are config errors so typos cannot silently
/// fall back to defaults.
inline void apply_setting(PipelineConfig& c, std::string_view key, std::string_view raw) {
  using namespace detail;
  const auto v = trim(raw);
  const std::string k(trim(key));
  if (k == "input") {
    c.inputs = split_list(v);
  } else if (k == "column.code") {
    c.column_code = v;
  } else if (k == "column.time") {
    c.column_time = v;
  } else if (k == "column.price") {
    c.column_price = v;
  } else if (k == "delimiter") {
    c.delimiter = v;
  } else if (k == "intervals") {
    c.intervals.clear();
    for (const auto& t : split_list(v))
      c.intervals.push_back(QuantizationScheme::fixed_interval_cny(parse_number<double>(k, t)).width_numerator());
  } else if (k == "state_counts") {
    c.state_counts.clear();
    for (const auto& t : split_list(v)) c.state_counts.push_back(parse_number<std::int64_t>(k, t));
  } else if (k == "min_length") {
    c.min_length = parse_number<std::size_t>(k, v);
  } else if (k == "min_states") {
    c.min_states = parse_number<std::size_t>(k, v);
  } else if (k == "models") {
    c.models.clear();
    for (const auto& m : split_list(v)) {
      auto kind = parse_model_kind(m);
      if (!c.uses(kind)) c.models.push_back(kind);
    }
  } else if (k == "seed") {
    if (v.empty() || v == "none") c.seed.reset();
    else c.seed = parse_number<std::uint64_t>(k, v);
  } else if (k == "dk.dim") {
    c.dk.dim = parse_number<std::size_t>(k, v);
  } else if (k == "dk.epochs") {
    c.dk.epochs = parse_number<std::size_t>(k, v);
  } else if (k == "dk.alpha0") {
    c.dk.alpha0 = parse_number<double>(k, v);
  } else if (k == "dk.margin") {
    c.dk.margin = parse_number<double>(k, v);
  } else if (k == "dk.negatives") {
    c.dk.negatives_per_step = parse_number<std::size_t>(k, v);
  } else if (k == "dk.online_alpha") {
    c.dk.online_alpha = v == "auto" ? -1.0 : parse_number<double>(k, v);
  } else if (k == "train_days") {
    c.train_days = parse_number<std::size_t>(k, v);
  } else if (k == "rmse_truth") {
    if (v == "raw") c.rmse_truth = RmseTruth::Raw;
    else if (v == "state") c.rmse_truth = RmseTruth::State;
    else throw ConfigError("rmse_truth must be raw or state");
  } else if (k == "volatility_denominator") {
    if (v == "returns") c.volatility_denominator = VolatilityDenominator::ReturnsMinusOne;
    else if (v == "prices") c.volatility_denominator = VolatilityDenominator::PricesMinusOne;
    else throw ConfigError("volatility_denominator must be returns or prices");
  } else if (k == "metadata") {
    c.metadata = v;
  } else if (k == "feature_setting") {
    c.feature_setting = v;
  } else if (k == "output_dir") {
    c.output_dir = v;
  } else if (k == "threads") {
    c.threads = parse_number<std::size_t>(k, v);
  } else if (k == "json") {
    c.json = parse_bool(k, v);
  } else {
    throw ConfigError("unknown config key '" + k + "'");
  }
}

/// `key = value` lines; `#` starts a comment; blank lines ignored.
inline PipelineConfig parse_config(std::istream& in, PipelineConfig base = {}) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto v = detail::trim(line);
    if (v.empty()) continue;
    auto eq = v.find('=');
    if (eq == std::string_view::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    apply_setting(base, v.substr(0, eq), v.substr(eq + 1));
  }
  return base;
}

inline PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  return parse_config(in, std::move(base));
}

/// Canonical text form; `parse_config` of this text reproduces the config.
/// With `for_hash`, keys that cannot change results are left out.
inline std::string print_config(const PipelineConfig& c, bool for_hash = false) {
  std::ostringstream o;
  std::vector<std::string> iv, sp, models;
  for (auto t : c.intervals) iv.push_back(format_price(Price{t}));
  for (auto s : c.state_counts) sp.push_back(std::to_string(s));
  for (auto m : c.models) models.push_back(to_string(m));
  o << "input = " << detail::join(c.inputs) << '\n'
    << "column.code = " << c.column_code << '\n'
    << "column.time = " << c.column_time << '\n'
    << "column.price = " << c.column_price << '\n'
    << "delimiter = " << c.delimiter << '\n'
    << "intervals = " << detail::join(iv) << '\n'
    << "state_counts = " << detail::join(sp) << '\n'
    << "min_length = " << c.min_length << '\n'
    << "min_states = " << c.min_states << '\n'
    << "models = " << detail::join(models) << '\n'
    << "seed = " << (c.seed ? std::to_string(*c.seed) : std::string("none")) << '\n'
    << "dk.dim = " << c.dk.dim << '\n'
    << "dk.epochs = " << c.dk.epochs << '\n'
    << "dk.alpha0 = " << format_number(c.dk.alpha0) << '\n'
    << "dk.margin = " << format_number(c.dk.margin) << '\n'
    << "dk.negatives = " << c.dk.negatives_per_step << '\n'
    << "dk.online_alpha = " << (c.dk.online_alpha < 0 ? std::string("auto") : format_number(c.dk.online_alpha)) << '\n'
    << "train_days = " << c.train_days << '\n'
    << "rmse_truth = " << (c.rmse_truth == RmseTruth::Raw ? "raw" : "state") << '\n'
    << "volatility_denominator = "
    << (c.volatility_denominator == VolatilityDenominator::ReturnsMinusOne ? "returns" : "prices") << '\n'
    << "metadata = " << c.metadata << '\n'
    << "feature_setting = " << c.feature_setting << '\n';
  if (!for_hash) {
    o << "output_dir = " << c.output_dir << '\n'
      << "threads = " << c.threads << '\n'
      << "json = " << (c.json ? "true" : "false") << '\n';
  }
  return o.str();
}

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 14695981039346656037ull) {
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string config_hash(const PipelineConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(print_config(c, true) + "version=" TICKPRED_VERSION)));
  return buf;
}

}  // namespace tickpred
