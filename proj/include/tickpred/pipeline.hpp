#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "tickpred/config.hpp"
#include "tickpred/entropy.hpp"
#include "tickpred/evaluate.hpp"
#include "tickpred/features.hpp"
#include "tickpred/ingest.hpp"
#include "tickpred/io.hpp"
#include "tickpred/predictability.hpp"
#include "tickpred/protocol.hpp"
#include "tickpred/quantize.hpp"
#include "tickpred/stats.hpp"

namespace tickpred {

struct SettingResult {
  std::string setting;
  bool kept = false;
  std::string reason;
  std::size_t length = 0;
  std::size_t distinct_states = 0;
  double s_est = 0.0;
  double mean_match_length = 0.0;
  double pi_max = 0.0;
  bool s_est_clamped = false;
  std::vector<EvaluationReport> evaluations;

  const EvaluationReport* evaluation(ModelKind kind) const {
    for (const auto& e : evaluations)
      if (e.model == kind) return &e;
    return nullptr;
  }
};

struct StockResult {
  std::string stock_code;
  std::size_t ticks = 0;
  std::size_t days = 0;
  std::optional<double> avgprice, volatility;
  std::vector<SettingResult> settings;
  std::vector<std::string> trace_files;  // relative to the output directory
};

inline std::string safe_file_name(std::string_view s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_') ? c : '_';
  return out.empty() ? "_" : out;
}

inline std::string trace_file_name(const std::string& code, const std::string& setting, ModelKind kind) {
  std::string s;
  for (char c : setting)
    if (c != '=') s += c;
  return "traces/" + safe_file_name(code) + "/" + safe_file_name(s) + "_" + to_string(kind) + ".csv";
}

// ---- per-stock JSON --------------------------------------------------------

inline nlohmann::ordered_json to_json(const StockResult& r) {
  nlohmann::ordered_json j;
  j["stock_code"] = r.stock_code;
  j["ticks"] = r.ticks;
  j["days"] = r.days;
  j["avgprice"] = r.avgprice ? nlohmann::ordered_json(*r.avgprice) : nlohmann::ordered_json();
  j["volatility"] = r.volatility ? nlohmann::ordered_json(*r.volatility) : nlohmann::ordered_json();
  auto settings = nlohmann::ordered_json::array();
  for (const auto& s : r.settings) {
    nlohmann::ordered_json js;
    js["setting"] = s.setting;
    js["kept"] = s.kept;
    js["reason"] = s.reason;
    js["length"] = s.length;
    js["distinct_states"] = s.distinct_states;
    if (s.kept) {
      js["s_est"] = s.s_est;
      js["mean_match_length"] = s.mean_match_length;
      js["pi_max"] = s.pi_max;
      js["s_est_clamped"] = s.s_est_clamped;
      auto evs = nlohmann::ordered_json::array();
      for (const auto& e : s.evaluations)
        evs.push_back({{"model", to_string(e.model)},
                       {"n_test", e.n_test},
                       {"acc", e.acc},
                       {"rmse", e.rmse},
                       {"rmse_price_ratio", e.rmse_price_ratio}});
      js["evaluations"] = std::move(evs);
    }
    settings.push_back(std::move(js));
  }
  j["settings"] = std::move(settings);
  j["trace_files"] = r.trace_files;
  return j;
}

inline StockResult stock_result_from_json(const nlohmann::json& j) {
  StockResult r;
  r.stock_code = j.at("stock_code").get<std::string>();
  r.ticks = j.at("ticks").get<std::size_t>();
  r.days = j.at("days").get<std::size_t>();
  if (!j.at("avgprice").is_null()) r.avgprice = j.at("avgprice").get<double>();
  if (!j.at("volatility").is_null()) r.volatility = j.at("volatility").get<double>();
  for (const auto& js : j.at("settings")) {
    SettingResult s;
    s.setting = js.at("setting").get<std::string>();
    s.kept = js.at("kept").get<bool>();
    s.reason = js.at("reason").get<std::string>();
    s.length = js.at("length").get<std::size_t>();
    s.distinct_states = js.at("distinct_states").get<std::size_t>();
    if (s.kept) {
      s.s_est = js.at("s_est").get<double>();
      s.mean_match_length = js.at("mean_match_length").get<double>();
      s.pi_max = js.at("pi_max").get<double>();
      s.s_est_clamped = js.at("s_est_clamped").get<bool>();
      for (const auto& je : js.at("evaluations")) {
        EvaluationReport e;
        e.stock_code = r.stock_code;
        e.model = parse_model_kind(je.at("model").get<std::string>());
        e.scheme = s.setting;
        e.n_test = je.at("n_test").get<std::size_t>();
        e.acc = je.at("acc").get<double>();
        e.rmse = je.at("rmse").get<double>();
        e.rmse_price_ratio = je.at("rmse_price_ratio").get<double>();
        s.evaluations.push_back(e);
      }
    }
    r.settings.push_back(std::move(s));
  }
  r.trace_files = j.at("trace_files").get<std::vector<std::string>>();
  return r;
}

// ---- per-stock processing --------------------------------------------------

inline std::uint64_t derive_dk_seed(std::uint64_t seed, const std::string& code, const std::string& setting) {
  return fnv1a(code + "|" + setting, fnv1a(std::to_string(seed)));
}

struct StockOutput {
  StockResult result;
  std::vector<std::pair<std::string, PredictionTrace>> traces;  // file name, trace
};

/// Filter, entropy, bound, both protocols and evaluation for every setting.
inline StockOutput process_stock(const PriceSeries& series, const PipelineConfig& cfg) {
  StockOutput out;
  auto& r = out.result;
  r.stock_code = series.stock_code;
  r.ticks = series.size();
  r.days = series.day_count();
  const auto prices = series.prices_cny();
  if (!prices.empty()) r.avgprice = mean(prices);
  if (prices.size() >= 3) r.volatility = volatility(prices, cfg.volatility_denominator);

  for (const auto& setting : cfg.settings()) {
    SettingResult s;
    s.setting = setting.label();
    s.length = series.size();
    auto reject = [&](std::string why) {
      s.kept = false;
      s.reason = std::move(why);
      r.settings.push_back(s);
    };
    if (series.size() < cfg.min_length) {
      reject("too short");
      continue;
    }
    if (series.day_count() < cfg.train_days + 1) {
      reject("too few days");
      continue;
    }
    const std::size_t train_end = series.day_boundaries[cfg.train_days];
    std::optional<QuantizationScheme> scheme;
    if (setting.mode == QuantizationMode::FixedInterval) {
      scheme = QuantizationScheme::fixed_interval(Price{setting.value});
    } else {
      auto [lo, hi] = std::minmax_element(
          series.points.begin(), series.points.begin() + static_cast<std::ptrdiff_t>(train_end),
          [](const PricePoint& a, const PricePoint& b) { return a.price < b.price; });
      if (lo->price == hi->price) {
        reject("flat training range");
        continue;
      }
      scheme = QuantizationScheme::fixed_state_count(setting.value, lo->price, hi->price);
    }
    auto q = quantize_with(series, *scheme);
    s.distinct_states = q.n_distinct;
    if (q.n_distinct < cfg.min_states) {
      reject("too few states");
      continue;
    }
    s.kept = true;
    const auto est = estimate_entropy(q);
    s.s_est = est.s_est;
    s.mean_match_length = est.mean_match_length;
    const auto n_states = static_cast<std::int64_t>(q.n_distinct);
    s.s_est_clamped = est.s_est > std::log2(static_cast<double>(n_states));
    s.pi_max = fano_solve(est.s_est, n_states);

    for (auto kind : cfg.models) {
      DiffusionKernelConfig dk = cfg.dk;
      if (cfg.seed) dk.seed = derive_dk_seed(*cfg.seed, series.stock_code, s.setting);
      auto trace = run_protocol(q.states, series.day_boundaries, kind, dk, cfg.train_days, series.stock_code);
      s.evaluations.push_back(evaluate_trace(trace, *scheme, cfg.rmse_truth, prices, *r.avgprice));
      s.evaluations.back().scheme = s.setting;
      auto name = trace_file_name(series.stock_code, s.setting, kind);
      r.trace_files.push_back(name);
      out.traces.emplace_back(std::move(name), std::move(trace));
    }
    r.settings.push_back(std::move(s));
  }
  return out;
}

// ---- aggregate tables --------------------------------------------------------

namespace detail {

inline std::vector<std::string> ordered_settings(const std::vector<StockResult>& results,
                                                 const std::vector<std::string>& order) {
  if (!order.empty()) return order;
  std::vector<std::string> labels;
  for (const auto& r : results)
    for (const auto& s : r.settings)
      if (std::find(labels.begin(), labels.end(), s.setting) == labels.end()) labels.push_back(s.setting);
  std::sort(labels.begin(), labels.end());
  return labels;
}

inline Table histogram(const std::vector<std::pair<std::vector<std::string>, std::vector<double>>>& groups,
                       std::vector<std::string> key_header, double width, std::size_t bins) {
  Table t;
  t.header = std::move(key_header);
  t.header.insert(t.header.end(), {"bin_lo", "bin_hi", "count"});
  for (const auto& [key, values] : groups) {
    if (values.empty()) continue;
    const double hi = *std::max_element(values.begin(), values.end());
    double w = width;
    std::size_t n = bins;
    if (w > 0.0) {
      n = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(hi / w)) + 1);
    } else {
      w = hi > 0.0 ? hi / static_cast<double>(n) : 1.0;
    }
    std::vector<std::size_t> counts(n, 0);
    for (double v : values) {
      auto k = v <= 0.0 ? 0 : static_cast<std::size_t>(std::floor(v / w));
      ++counts[std::min(k, n - 1)];
    }
    for (std::size_t k = 0; k < n; ++k) {
      auto row = key;
      row.push_back(format_number(w * static_cast<double>(k)));
      row.push_back(format_number(w * static_cast<double>(k + 1)));
      row.push_back(std::to_string(counts[k]));
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

}  // namespace detail

/// Means of ACC, Pi_max and RMSE per (setting, model) over kept stocks, and
/// the share of those stocks whose entropy estimate is below 2 bits.
inline Table emit_summary(const std::vector<StockResult>& results, const std::vector<std::string>& setting_order = {},
                          const std::vector<ModelKind>& models = {ModelKind::MC, ModelKind::DK}) {
  Table t;
  t.header = {"setting", "model", "stocks", "mean_acc", "mean_pi_max", "mean_rmse", "mean_rmse_price_ratio",
              "share_s_est_below_2"};
  for (const auto& label : detail::ordered_settings(results, setting_order)) {
    for (auto kind : models) {
      std::size_t n = 0, below = 0;
      double acc = 0, pi = 0, rm = 0, ratio = 0;
      for (const auto& r : results)
        for (const auto& s : r.settings) {
          if (s.setting != label || !s.kept) continue;
          const auto* e = s.evaluation(kind);
          if (!e) continue;
          ++n;
          acc += e->acc;
          pi += s.pi_max;
          rm += e->rmse;
          ratio += e->rmse_price_ratio;
          if (s.s_est < 2.0) ++below;
        }
      if (n == 0) continue;
      const double d = static_cast<double>(n);
      t.rows.push_back({label, to_string(kind), std::to_string(n), format_number(acc / d), format_number(pi / d),
                        format_number(rm / d), format_number(ratio / d),
                        format_number(static_cast<double>(below) / d)});
    }
  }
  if (t.rows.empty()) throw DataError("summary needs at least one evaluated stock");
  return t;
}

struct ReportTables {
  std::vector<std::pair<std::string, Table>> tables;  // file stem, table
};

inline ReportTables build_reports(const std::vector<StockResult>& results, const PipelineConfig& cfg,
                                  const std::map<std::string, StockMetadata>& metadata) {
  std::vector<std::string> order;
  for (const auto& s : cfg.settings()) order.push_back(s.label());

  Table pred, eval, filtered, acc_pi, acc_rmse;
  pred.header = {"stock_code", "setting", "n", "n_states", "s_est", "mean_match_length", "pi_max"};
  eval.header = {"stock_code", "setting", "model", "n_test", "acc", "rmse", "rmse_price_ratio"};
  filtered.header = {"stock_code", "setting", "reason", "length", "distinct_states"};
  acc_pi.header = {"stock_code", "setting", "model", "acc", "pi_max"};
  acc_rmse.header = {"stock_code", "setting", "model", "acc", "rmse"};
  std::vector<std::pair<std::vector<std::string>, std::vector<double>>> entropy_groups, rmse_groups;

  for (const auto& label : order) {
    std::vector<double> entropies;
    std::map<ModelKind, std::vector<double>> rmses;
    for (const auto& r : results)
      for (const auto& s : r.settings) {
        if (s.setting != label) continue;
        if (!s.kept) {
          filtered.rows.push_back({r.stock_code, label, s.reason, std::to_string(s.length),
                                   std::to_string(s.distinct_states)});
          continue;
        }
        entropies.push_back(s.s_est);
        pred.rows.push_back({r.stock_code, label, std::to_string(s.length), std::to_string(s.distinct_states),
                             format_number(s.s_est), format_number(s.mean_match_length), format_number(s.pi_max)});
        for (const auto& e : s.evaluations) {
          const auto m = to_string(e.model);
          eval.rows.push_back({r.stock_code, label, m, std::to_string(e.n_test), format_number(e.acc),
                               format_number(e.rmse), format_number(e.rmse_price_ratio)});
          acc_pi.rows.push_back({r.stock_code, label, m, format_number(e.acc), format_number(s.pi_max)});
          acc_rmse.rows.push_back({r.stock_code, label, m, format_number(e.acc), format_number(e.rmse)});
          rmses[e.model].push_back(e.rmse);
        }
      }
    entropy_groups.push_back({{label}, std::move(entropies)});
    for (auto kind : cfg.models) rmse_groups.push_back({{label, to_string(kind)}, std::move(rmses[kind])});
  }

  ReportTables out;
  out.tables.emplace_back("predictability", std::move(pred));
  out.tables.emplace_back("evaluation", std::move(eval));
  out.tables.emplace_back("filtered", std::move(filtered));
  try {
    out.tables.emplace_back("summary", emit_summary(results, order, cfg.models));
  } catch (const DataError&) {
    Table empty;
    empty.header = {"setting", "model", "stocks", "mean_acc", "mean_pi_max", "mean_rmse", "mean_rmse_price_ratio",
                    "share_s_est_below_2"};
    out.tables.emplace_back("summary", std::move(empty));
  }
  out.tables.emplace_back("dist_entropy", detail::histogram(entropy_groups, {"setting"}, 0.25, 0));
  out.tables.emplace_back("dist_acc_pimax", std::move(acc_pi));
  out.tables.emplace_back("dist_rmse", detail::histogram(rmse_groups, {"setting", "model"}, 0.0, 20));
  out.tables.emplace_back("scatter_acc_rmse", std::move(acc_rmse));

  const auto fs = cfg.effective_feature_setting();
  std::vector<FeatureRow> rows;
  for (const auto& r : results) {
    if (!r.avgprice || !r.volatility) continue;
    FeatureRow f;
    f.stock_code = r.stock_code;
    f.avgprice = *r.avgprice;
    f.volatility = *r.volatility;
    apply_metadata(f, metadata);
    for (const auto& s : r.settings) {
      if (s.setting != fs || !s.kept) continue;
      f.pi_max = s.pi_max;
      if (const auto* e = s.evaluation(ModelKind::MC)) f.acc_mc = e->acc;
      if (const auto* e = s.evaluation(ModelKind::DK)) f.acc_dk = e->acc;
    }
    rows.push_back(std::move(f));
  }
  auto corr = correlate(rows);
  out.tables.emplace_back("features", features_table(rows));
  out.tables.emplace_back("correlation", std::move(corr.spearman));
  out.tables.emplace_back("anova", std::move(corr.anova));
  return out;
}

// ---- run_all -----------------------------------------------------------------

struct RunSummary {
  nlohmann::json manifest;
  std::size_t computed = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
  std::size_t stocks = 0;

  int exit_code() const { return failed ? 3 : 0; }
};

using LogFn = std::function<void(const std::string&)>;

/// Expands directories to their regular files (sorted) and checks every
/// input can be opened.
inline std::vector<std::filesystem::path> resolve_inputs(const std::vector<std::string>& inputs) {
  namespace fs = std::filesystem;
  if (inputs.empty()) throw ConfigError("no input files configured");
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    fs::path p(in);
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file()) found.push_back(e.path());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(p);
    }
  }
  for (const auto& f : files) {
    std::ifstream probe(f);
    if (!probe) throw DataError("cannot read input " + f.string());
  }
  if (files.empty()) throw DataError("input directories contain no files");
  return files;
}

inline RunSummary run_all(const PipelineConfig& cfg, const LogFn& log = {}) {
  namespace fs = std::filesystem;
  auto say = [&](const std::string& m) {
    if (log) log(m);
  };

  // everything that can be rejected up front is rejected before any work
  cfg.validate();
  const auto schema = cfg.schema();
  const auto files = resolve_inputs(cfg.inputs);
  std::map<std::string, StockMetadata> metadata;
  if (!cfg.metadata.empty()) {
    std::ifstream in(cfg.metadata);
    if (!in) throw DataError("cannot read metadata " + cfg.metadata);
    metadata = read_metadata(in);
  }

  const fs::path out_dir(cfg.output_dir);
  const auto hash = config_hash(cfg);
  const fs::path manifest_path = out_dir / "manifest.json";

  // previous manifest, honoured only when the config hash matches
  std::map<std::string, bool> previously_done;
  if (fs::exists(manifest_path)) {
    try {
      std::ifstream in(manifest_path);
      auto old = nlohmann::json::parse(in);
      if (old.value("config_hash", "") == hash)
        for (const auto& [code, entry] : old.at("stocks").items())
          if (entry.value("status", "") == "done") previously_done[code] = true;
    } catch (const std::exception&) {
      say("ignoring unreadable manifest " + manifest_path.string());
    }
  }

  nlohmann::json manifest;
  manifest["tool_version"] = TICKPRED_VERSION;
  manifest["config_hash"] = hash;
  manifest["stocks"] = nlohmann::json::object();
  manifest["inputs"] = nlohmann::json::array();

  std::vector<TickRecord> records;
  std::size_t good_files = 0;
  std::optional<Error> first_error;
  for (const auto& f : files) {
    nlohmann::json entry{{"path", f.string()}};
    try {
      auto in = open_input(f);
      auto parsed = parse_ticks(in, schema);
      entry["records"] = parsed.records.size();
      entry["malformed"] = parsed.malformed;
      entry["status"] = "ok";
      records.insert(records.end(), std::make_move_iterator(parsed.records.begin()),
                     std::make_move_iterator(parsed.records.end()));
      ++good_files;
    } catch (const Error& e) {
      if (!first_error) first_error = e;
      entry["status"] = "failed";
      entry["reason"] = e.what();
      manifest["stocks"][f.stem().string()] = {{"status", "failed"}, {"reason", e.what()}};
      say("input " + f.string() + " failed: " + e.what());
    }
    manifest["inputs"].push_back(std::move(entry));
  }
  if (good_files == 0 && first_error) throw *first_error;

  auto series_map = build_series(records);
  records.clear();
  records.shrink_to_fit();
  std::vector<const PriceSeries*> stocks;
  for (const auto& [code, s] : series_map) stocks.push_back(&s);

  RunSummary summary;
  summary.stocks = stocks.size() + (manifest["stocks"].size());
  std::vector<std::optional<StockResult>> results(stocks.size());
  std::mutex manifest_mutex;

  auto write_manifest = [&] {
    const auto tmp = manifest_path.string() + ".tmp";
    write_file(tmp, manifest.dump(2) + "\n");
    fs::rename(tmp, manifest_path);
  };
  fs::create_directories(out_dir);
  for (const auto* s : stocks) manifest["stocks"][s->stock_code] = {{"status", "pending"}};
  write_manifest();

  auto finish = [&](const std::string& code, nlohmann::json entry, bool skipped, bool ok) {
    std::lock_guard lock(manifest_mutex);
    manifest["stocks"][code] = std::move(entry);
    if (skipped) ++summary.skipped;
    else if (ok) ++summary.computed;
    else ++summary.failed;
    write_manifest();
  };

  auto try_reuse = [&](const PriceSeries& s) -> std::optional<StockResult> {
    if (!previously_done.count(s.stock_code)) return std::nullopt;
    try {
      std::ifstream in(out_dir / "stocks" / (safe_file_name(s.stock_code) + ".json"));
      if (!in) return std::nullopt;
      auto r = stock_result_from_json(nlohmann::json::parse(in));
      if (r.stock_code != s.stock_code || r.ticks != s.size()) return std::nullopt;
      for (const auto& t : r.trace_files)
        if (!fs::exists(out_dir / t)) return std::nullopt;
      return r;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < stocks.size(); i = next++) {
      const auto& s = *stocks[i];
      if (auto reused = try_reuse(s)) {
        results[i] = std::move(reused);
        finish(s.stock_code, {{"status", "done"}}, true, true);
        continue;
      }
      try {
        auto out = process_stock(s, cfg);
        for (const auto& [name, trace] : out.traces) {
          std::ostringstream os;
          write_trace(os, trace);
          write_file(out_dir / name, os.str());
        }
        write_file(out_dir / "stocks" / (safe_file_name(s.stock_code) + ".json"), to_json(out.result).dump(2) + "\n");
        results[i] = std::move(out.result);
        finish(s.stock_code, {{"status", "done"}}, false, true);
        say("stock " + s.stock_code + " done");
      } catch (const std::exception& e) {
        finish(s.stock_code, {{"status", "failed"}, {"reason", e.what()}}, false, false);
        say("stock " + s.stock_code + " failed: " + e.what());
      }
    }
  };

  std::size_t threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(1, stocks.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (const auto& [code, entry] : manifest["stocks"].items())
    if (entry.value("status", "") == "failed" && !series_map.count(code)) ++summary.failed;

  std::vector<StockResult> done;
  for (auto& r : results)
    if (r) done.push_back(std::move(*r));
  for (const auto& [stem, table] : build_reports(done, cfg, metadata).tables)
    write_table(out_dir / (stem + ".csv"), table, cfg.json);

  manifest["summary"] = {{"stocks", summary.stocks},
                         {"done", done.size()},
                         {"failed", summary.failed}};
  write_manifest();
  summary.manifest = manifest;
  return summary;
}

}  // namespace tickpred
