// Command-line front end: one subcommand per pipeline stage plus run-all.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tickpred/config.hpp"
#include "tickpred/features.hpp"
#include "tickpred/pipeline.hpp"

namespace fs = std::filesystem;
using namespace tickpred;

namespace {

enum Exit : int { kOk = 0, kConfig = 1, kData = 2, kPartial = 3 };

struct Globals {
  bool json = false;
};

void emit(const Table& t, const std::string& out, bool json) {
  if (!out.empty()) {
    write_table(out, t, json);
  } else if (json) {
    std::cout << t.to_json().dump(2) << '\n';
  } else {
    t.write_csv(std::cout);
  }
}

struct SchemaFlags {
  std::string code = "1", time = "2", price = "3", delimiter = "auto";

  void add(CLI::App* app) {
    app->add_option("--code-column", code, "Stock code column (name or 1-based position)")->capture_default_str();
    app->add_option("--time-column", time, "Timestamp column")->capture_default_str();
    app->add_option("--price-column", price, "Last-price column")->capture_default_str();
    app->add_option("--delimiter", delimiter, "auto, comma or tab")
        ->check(CLI::IsMember({"auto", "comma", "tab"}))
        ->capture_default_str();
  }

  TickSchema schema() const {
    PipelineConfig c;
    c.column_code = code;
    c.column_time = time;
    c.column_price = price;
    c.delimiter = delimiter;
    return c.schema();
  }
};

std::map<std::string, PriceSeries> load_ticks(const std::vector<std::string>& inputs, const TickSchema& schema) {
  std::vector<TickRecord> all;
  for (const auto& f : resolve_inputs(inputs)) {
    auto in = open_input(f);
    auto parsed = parse_ticks(in, schema);
    if (parsed.malformed) std::cerr << f.string() << ": skipped " << parsed.malformed << " malformed rows\n";
    all.insert(all.end(), parsed.records.begin(), parsed.records.end());
  }
  return build_series(all);
}

PriceSeries load_series(const std::string& path, std::string code) {
  auto in = open_input(path);
  if (code.empty()) code = fs::path(path).stem().string();
  return read_series(in, code);
}

StatesFile load_states(const std::string& path) {
  auto in = open_input(path);
  return read_states(in);
}

struct DkFlags {
  DiffusionKernelConfig dk;
  std::string online = "auto";

  void add(CLI::App* app) {
    app->add_option("--seed", dk.seed, "RNG seed for the DK model")->capture_default_str();
    app->add_option("--dk-dim", dk.dim, "Embedding dimension")->capture_default_str();
    app->add_option("--dk-epochs", dk.epochs, "Training epochs")->capture_default_str();
    app->add_option("--dk-alpha0", dk.alpha0, "Initial learning rate")->capture_default_str();
    app->add_option("--dk-margin", dk.margin, "Margin")->capture_default_str();
    app->add_option("--dk-negatives", dk.negatives_per_step, "Negatives per positive")->capture_default_str();
    app->add_option("--dk-online-alpha", online, "Online learning rate, or auto for alpha0/10")->capture_default_str();
  }

  DiffusionKernelConfig get() const {
    auto c = dk;
    PipelineConfig tmp;
    apply_setting(tmp, "dk.online_alpha", online);
    c.online_alpha = tmp.dk.online_alpha;
    c.validate();
    return c;
  }
};

QuantizationScheme scheme_from_flags(const std::string& scheme_path, double interval) {
  if (!scheme_path.empty()) {
    std::ifstream in(scheme_path);
    if (!in) throw DataError("cannot open " + scheme_path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("bad scheme file: ") + e.what());
    }
    return scheme_from_json(j);
  }
  if (interval <= 0) throw ConfigError("give --scheme or --interval");
  return QuantizationScheme::fixed_interval_cny(interval);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tick-data predictability toolkit: quantization, entropy, predictability bound, online prediction"};
  app.set_version_flag("--version", TICKPRED_VERSION);
  app.require_subcommand(0, 1);
  Globals g;
  bool print_defaults = false;
  app.fallthrough();
  app.add_flag("--json", g.json, "Mirror output as JSON");
  app.add_flag("--print-config", print_defaults, "Print the default run-all config and exit");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Parse tick files into per-stock series and apply the filters");
  std::vector<std::string> ingest_inputs;
  std::string ingest_out_dir;
  SchemaFlags ingest_schema;
  double ingest_interval = 0.01;
  std::size_t min_length = kDefaultMinLength, min_states = kDefaultMinStates;
  ingest->add_option("-i,--input", ingest_inputs, "Tick files or directories")->required();
  ingest_schema.add(ingest);
  ingest->add_option("-o,--out-dir", ingest_out_dir, "Write one epoch_seconds,price_hundredths file per stock");
  ingest->add_option("--interval", ingest_interval, "Interval used by the state filter (CNY)")->capture_default_str();
  ingest->add_option("--min-length", min_length, "Minimum ticks")->capture_default_str();
  ingest->add_option("--min-states", min_states, "Minimum distinct states")->capture_default_str();

  // quantize
  auto* quantize = app.add_subcommand("quantize", "Map a price series to state ids");
  std::string q_series, q_code, q_out, q_scheme_out;
  double q_interval = 0;
  std::int64_t q_count = 0;
  std::size_t q_train_days = 1;
  quantize->add_option("-s,--series", q_series, "Series file (epoch_seconds,price_hundredths)")->required();
  quantize->add_option("--code", q_code, "Stock code (default: file stem)");
  auto* qi = quantize->add_option("-T,--interval", q_interval, "Fixed interval in CNY");
  auto* qc = quantize->add_option("--state-count", q_count, "Fixed state count fitted on the training days");
  qi->excludes(qc);
  quantize->add_option("--train-days", q_train_days, "Training days for --state-count")->capture_default_str();
  quantize->add_option("-o,--out", q_out, "States file (day,state)");
  quantize->add_option("--scheme-out", q_scheme_out, "Write the scheme as JSON");

  // entropy
  auto* entropy = app.add_subcommand("entropy", "Lempel-Ziv entropy estimate of a state sequence");
  std::string e_states, e_unit = "bits", e_out, e_lambda_out;
  entropy->add_option("--states", e_states, "States file")->required();
  entropy->add_option("--unit", e_unit, "bits or nats")->check(CLI::IsMember({"bits", "nats"}))->capture_default_str();
  entropy->add_option("-o,--out", e_out, "Output CSV");
  entropy->add_option("--lambda-out", e_lambda_out, "Write the per-position match lengths");

  // predictability
  auto* pred = app.add_subcommand("predictability", "Upper bound on prediction accuracy from entropy and state count");
  double p_entropy = -1;
  std::int64_t p_n = 0;
  std::string p_states, p_out;
  auto* pe = pred->add_option("--entropy", p_entropy, "Entropy in bits");
  auto* pn = pred->add_option("--n-states", p_n, "Number of states");
  auto* ps = pred->add_option("--states", p_states, "States file (entropy and state count computed from it)");
  ps->excludes(pe)->excludes(pn);
  pred->add_option("-o,--out", p_out, "Output CSV");

  // predict
  auto* predict = app.add_subcommand("predict", "Online next-state prediction over the test days");
  std::string m_states, m_model = "MC", m_out;
  std::size_t m_train_days = 1;
  DkFlags m_dk;
  predict->add_option("--states", m_states, "States file")->required();
  predict->add_option("-m,--model", m_model, "MC or DK")->capture_default_str();
  predict->add_option("--train-days", m_train_days, "Training days")->capture_default_str();
  m_dk.add(predict);
  predict->add_option("-o,--out", m_out, "Trace CSV (index,predicted,actual)");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Accuracy, RMSE and RMSE/price ratio of a trace");
  std::string v_trace, v_scheme, v_series, v_truth = "raw", v_model, v_code, v_out;
  double v_interval = 0, v_avgprice = 0;
  evaluate->add_option("--trace", v_trace, "Trace file")->required();
  evaluate->add_option("--scheme", v_scheme, "Scheme JSON written by quantize");
  evaluate->add_option("-T,--interval", v_interval, "Fixed interval in CNY when no scheme file is given");
  evaluate->add_option("--series,--prices", v_series, "Series file: raw truth prices and average price");
  evaluate->add_option("--truth", v_truth, "raw or state")->check(CLI::IsMember({"raw", "state"}))->capture_default_str();
  evaluate->add_option("--avgprice", v_avgprice, "Average price for the ratio when no series is given");
  evaluate->add_option("-m,--model", v_model, "Model label for the report");
  evaluate->add_option("--code", v_code, "Stock code for the report");
  evaluate->add_option("-o,--out", v_out, "Output CSV");

  // features
  auto* features = app.add_subcommand("features", "Average price and volatility per stock, joined with metadata");
  std::vector<std::string> f_inputs, f_series;
  std::string f_metadata, f_out, f_denom = "returns";
  SchemaFlags f_schema;
  features->add_option("-i,--input", f_inputs, "Tick files or directories");
  features->add_option("--series", f_series, "Series files (code from file stem)");
  f_schema.add(features);
  features->add_option("--metadata", f_metadata, "CSV with stock_code,category,region,scale,life");
  features->add_option("--volatility-denominator", f_denom, "returns or prices")
      ->check(CLI::IsMember({"returns", "prices"}))
      ->capture_default_str();
  features->add_option("-o,--out", f_out, "Feature table CSV");

  // correlate
  auto* correlate_cmd = app.add_subcommand("correlate", "Spearman and one-way ANOVA over a feature table");
  std::string c_features, c_out_dir;
  correlate_cmd->add_option("--features", c_features, "Feature table CSV")->required();
  correlate_cmd->add_option("-o,--out-dir", c_out_dir, "Write correlation.csv and anova.csv here");

  // run-all
  auto* run = app.add_subcommand("run-all", "Full pipeline over a config file, resumable via the manifest");
  std::string r_config, r_output;
  std::vector<std::string> r_set, r_inputs;
  bool r_print = false, r_force = false;
  std::size_t r_threads = 0;
  run->add_option("-c,--config", r_config, "Config file (key = value)");
  run->add_option("--set", r_set, "Override a config key: key=value")->take_all();
  run->add_option("-i,--input", r_inputs, "Input files (overrides the config)");
  run->add_option("-o,--output-dir", r_output, "Output directory (overrides the config)");
  run->add_option("--threads", r_threads, "Worker threads (0: all cores)");
  run->add_flag("--print-config", r_print, "Print the effective config and exit");
  run->add_flag("--force", r_force, "Ignore an existing manifest and recompute everything");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (print_defaults) {
      std::cout << print_config(PipelineConfig{});
      return kOk;
    }

    if (*ingest) {
      auto series = load_ticks(ingest_inputs, ingest_schema.schema());
      auto scheme = QuantizationScheme::fixed_interval_cny(ingest_interval);
      Table t;
      t.header = {"stock_code", "ticks", "days", "first_time", "last_time", "distinct_states", "kept", "reason"};
      for (const auto& [code, s] : series) {
        auto d = filter_series(s, scheme, min_length, min_states);
        t.rows.push_back({code, std::to_string(s.size()), std::to_string(s.day_count()),
                          format_timestamp(s.points.front().timestamp), format_timestamp(s.points.back().timestamp),
                          std::to_string(d.distinct_states), d.keep ? "true" : "false", d.reason});
        if (!ingest_out_dir.empty()) {
          std::ostringstream os;
          write_series(os, s);
          write_file(fs::path(ingest_out_dir) / (safe_file_name(code) + ".csv"), os.str());
        }
      }
      emit(t, {}, g.json);
      return kOk;
    }

    if (*quantize) {
      auto s = load_series(q_series, q_code);
      QuantizedSequence q;
      if (q_count > 0) {
        if (s.day_count() < q_train_days + 1) throw DataError("series has too few days for the training slice");
        q = quantize_fixed_count(s, q_count, s.day_boundaries[q_train_days]);
      } else if (q_interval > 0) {
        q = quantize_with(s, QuantizationScheme::fixed_interval_cny(q_interval));
      } else {
        throw ConfigError("give --interval or --state-count");
      }
      std::ostringstream os;
      write_states(os, q.states, s.day_boundaries);
      if (q_out.empty()) std::cout << os.str();
      else write_file(q_out, os.str());
      if (!q_scheme_out.empty()) write_file(q_scheme_out, scheme_to_json(q.scheme).dump(2) + "\n");
      std::cerr << s.stock_code << ": " << q.size() << " states, " << q.n_distinct << " distinct, " << q.scheme.label()
                << '\n';
      return kOk;
    }

    if (*entropy) {
      auto f = load_states(e_states);
      const auto unit = e_unit == "nats" ? EntropyUnit::Nats : EntropyUnit::Bits;
      auto est = estimate_entropy(f.states, unit, !e_lambda_out.empty());
      Table t;
      t.header = {"n", "n_states", "mean_match_length", "s_est", "unit"};
      t.rows.push_back({std::to_string(est.n), std::to_string(count_distinct(f.states)),
                        format_number(est.mean_match_length), format_number(est.s_est), e_unit});
      if (!e_lambda_out.empty()) {
        std::ostringstream os;
        os << "index,lambda\n";
        for (std::size_t i = 0; i < est.lambda.size(); ++i) os << i << ',' << est.lambda[i] << '\n';
        write_file(e_lambda_out, os.str());
      }
      emit(t, e_out, g.json);
      return kOk;
    }

    if (*pred) {
      double s = p_entropy;
      std::int64_t n = p_n;
      if (!p_states.empty()) {
        auto f = load_states(p_states);
        s = estimate_entropy(f.states).s_est;
        n = static_cast<std::int64_t>(count_distinct(f.states));
      } else if (p_entropy < 0 || p_n < 1) {
        throw ConfigError("give --states, or both --entropy and --n-states");
      }
      const auto clamped_before = fano_clamp_counter().load();
      const double pi = fano_solve(s, n);
      Table t;
      t.header = {"s_est", "n_states", "pi_max", "clamped"};
      t.rows.push_back({format_number(s), std::to_string(n), format_number(pi),
                        fano_clamp_counter().load() != clamped_before ? "true" : "false"});
      emit(t, p_out, g.json);
      return kOk;
    }

    if (*predict) {
      auto f = load_states(m_states);
      const auto kind = parse_model_kind(m_model);
      auto trace = run_protocol(f.states, f.day_boundaries, kind, kind == ModelKind::DK ? m_dk.get() : m_dk.dk,
                                m_train_days);
      std::ostringstream os;
      write_trace(os, trace);
      Table t;
      t.header = {"index", "predicted", "actual"};
      for (std::size_t k = 0; k < trace.size(); ++k)
        t.rows.push_back({std::to_string(trace.start_index + k), std::to_string(trace.predictions[k].predicted),
                          std::to_string(trace.predictions[k].actual)});
      emit(t, m_out, g.json);
      std::cerr << to_string(kind) << ": " << trace.size() << " predictions, ACC " << format_number(accuracy(trace))
                << '\n';
      return kOk;
    }

    if (*evaluate) {
      auto in = open_input(v_trace);
      auto trace = read_trace(in);
      trace.stock_code = v_code;
      if (!v_model.empty()) trace.model = parse_model_kind(v_model);
      auto scheme = scheme_from_flags(v_scheme, v_interval);
      const auto truth = v_truth == "raw" ? RmseTruth::Raw : RmseTruth::State;
      std::vector<double> prices;
      double avg = v_avgprice;
      if (!v_series.empty()) {
        auto s = load_series(v_series, v_code);
        prices = s.prices_cny();
        if (avg <= 0) avg = mean(prices);
        if (trace.stock_code.empty()) trace.stock_code = s.stock_code;
      } else if (truth == RmseTruth::Raw) {
        throw ConfigError("--truth raw needs --series");
      }
      auto r = evaluate_trace(trace, scheme, truth, prices, avg);
      Table t;
      t.header = {"stock_code", "model", "setting", "n_test", "acc", "rmse", "rmse_price_ratio"};
      t.rows.push_back({r.stock_code, v_model.empty() ? std::string() : to_string(r.model), r.scheme,
                        std::to_string(r.n_test), format_number(r.acc), format_number(r.rmse),
                        avg > 0 ? format_number(r.rmse_price_ratio) : std::string()});
      emit(t, v_out, g.json);
      return kOk;
    }

    if (*features) {
      if (f_inputs.empty() && f_series.empty()) throw ConfigError("give --input or --series");
      std::map<std::string, PriceSeries> all;
      if (!f_inputs.empty()) all = load_ticks(f_inputs, f_schema.schema());
      for (const auto& p : f_series) {
        auto s = load_series(p, {});
        all[s.stock_code] = std::move(s);
      }
      std::map<std::string, StockMetadata> meta;
      if (!f_metadata.empty()) {
        auto in = open_input(f_metadata);
        meta = read_metadata(in);
      }
      const auto denom =
          f_denom == "prices" ? VolatilityDenominator::PricesMinusOne : VolatilityDenominator::ReturnsMinusOne;
      std::vector<FeatureRow> rows;
      for (const auto& [code, s] : all) {
        auto row = extract_features(s, denom);
        apply_metadata(row, meta);
        rows.push_back(std::move(row));
      }
      emit(features_table(rows), f_out, g.json);
      return kOk;
    }

    if (*correlate_cmd) {
      auto in = open_input(c_features);
      auto tables = correlate(read_features(in));
      if (!c_out_dir.empty()) {
        write_table(fs::path(c_out_dir) / "correlation.csv", tables.spearman, g.json);
        write_table(fs::path(c_out_dir) / "anova.csv", tables.anova, g.json);
      } else if (g.json) {
        nlohmann::ordered_json j;
        j["correlation"] = tables.spearman.to_json();
        j["anova"] = tables.anova.to_json();
        std::cout << j.dump(2) << '\n';
      } else {
        tables.spearman.write_csv(std::cout);
        std::cout << '\n';
        tables.anova.write_csv(std::cout);
      }
      return kOk;
    }

    if (*run) {
      PipelineConfig cfg;
      if (!r_config.empty()) cfg = load_config(r_config);
      for (const auto& kv : r_set) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
      }
      if (!r_inputs.empty()) cfg.inputs = r_inputs;
      if (!r_output.empty()) cfg.output_dir = r_output;
      if (r_threads) cfg.threads = r_threads;
      if (g.json) cfg.json = true;
      if (r_print) {
        std::cout << print_config(cfg);
        return kOk;
      }
      if (r_force) fs::remove(fs::path(cfg.output_dir) / "manifest.json");
      auto summary = run_all(cfg, [](const std::string& m) { std::cerr << m << '\n'; });
      std::cerr << "stocks " << summary.stocks << ", computed " << summary.computed << ", reused " << summary.skipped
                << ", failed " << summary.failed << '\n';
      return summary.exit_code();
    }

    std::cout << app.help();
    return kOk;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::Config ? kConfig : kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
}
