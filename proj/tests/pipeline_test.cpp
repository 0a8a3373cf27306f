#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>

#include "tickpred/pipeline.hpp"

using namespace tickpred;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = TICKPRED_FIXTURE_DIR;

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("tickpred_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return files;
}

PipelineConfig fixture_config(const fs::path& out) {
  PipelineConfig c;
  c.inputs = {(kFixtures / "ticks.csv").string()};
  c.metadata = (kFixtures / "metadata.csv").string();
  c.output_dir = out.string();
  c.threads = 2;
  return c;
}

std::size_t count_rows(const std::string& csv, const std::string& needle) {
  std::istringstream in(csv);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line))
    if (line.find(needle) != std::string::npos) ++n;
  return n;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TICKPRED_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

StockResult fake_stock(std::string code, double acc, double pi, double rmse, double s_est) {
  StockResult r;
  r.stock_code = std::move(code);
  SettingResult s;
  s.setting = "T=0.01";
  s.kept = true;
  s.pi_max = pi;
  s.s_est = s_est;
  EvaluationReport e;
  e.model = ModelKind::MC;
  e.acc = acc;
  e.rmse = rmse;
  s.evaluations.push_back(e);
  r.settings.push_back(s);
  return r;
}

}  // namespace

TEST(RunAll, CartesianProductOfStocksAndSettings) {
  auto out = scratch("cartesian");
  auto summary = run_all(fixture_config(out));
  EXPECT_EQ(summary.exit_code(), 0);
  EXPECT_EQ(summary.computed, 3u);
  EXPECT_EQ(summary.failed, 0u);
  const auto eval = slurp(out / "evaluation.csv");
  EXPECT_EQ(count_rows(eval, ",MC,"), 6u);
  EXPECT_EQ(count_rows(eval, ",DK,"), 6u);
  EXPECT_EQ(count_rows(slurp(out / "predictability.csv"), ",T=0."), 6u);
  EXPECT_EQ(count_rows(slurp(out / "summary.csv"), "T=0."), 4u);
  for (const auto& code : {"600001", "600002", "000003"}) {
    EXPECT_EQ(summary.manifest["stocks"][code]["status"], "done");
    EXPECT_TRUE(fs::exists(out / "stocks" / (std::string(code) + ".json")));
    EXPECT_TRUE(fs::exists(out / "traces" / code / "T0.05_DK.csv"));
  }
  for (const auto* f : {"filtered.csv", "dist_entropy.csv", "dist_acc_pimax.csv", "dist_rmse.csv",
                        "scatter_acc_rmse.csv", "features.csv", "correlation.csv", "anova.csv"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  EXPECT_EQ(count_rows(slurp(out / "features.csv"), ",3,"), 2u);  // two stocks in category 3
  fs::remove_all(out);
}

TEST(RunAll, ByteIdenticalAcrossRunsAndThreadCounts) {
  auto a = scratch("det_a"), b = scratch("det_b");
  auto ca = fixture_config(a), cb = fixture_config(b);
  ca.threads = 1;
  cb.threads = 3;
  ca.json = cb.json = true;
  run_all(ca);
  run_all(cb);
  auto sa = snapshot(a), sb = snapshot(b);
  EXPECT_EQ(sa, sb);
  EXPECT_TRUE(sa.count("summary.json"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(RunAll, RerunSkipsDoneStocksAndReproducesOutputs) {
  auto out = scratch("rerun");
  auto cfg = fixture_config(out);
  run_all(cfg);
  const auto first = snapshot(out);
  auto again = run_all(cfg);
  EXPECT_EQ(again.computed, 0u);
  EXPECT_EQ(again.skipped, 3u);
  EXPECT_EQ(snapshot(out), first);

  // a missing per-stock report means that stock is not done
  fs::remove(out / "stocks" / "600002.json");
  auto partial = run_all(cfg);
  EXPECT_EQ(partial.computed, 1u);
  EXPECT_EQ(partial.skipped, 2u);
  EXPECT_EQ(snapshot(out), first);

  // a different config invalidates the manifest
  cfg.seed = 7;
  auto changed = run_all(cfg);
  EXPECT_EQ(changed.computed, 3u);
  EXPECT_NE(slurp(out / "manifest.json"), first.at("manifest.json"));
  fs::remove_all(out);
}

TEST(RunAll, CorruptFileIsIsolated) {
  auto out = scratch("corrupt");
  auto cfg = fixture_config(out);
  cfg.inputs.push_back((kFixtures / "corrupt_600999.csv").string());
  auto summary = run_all(cfg);
  EXPECT_EQ(summary.failed, 1u);
  EXPECT_EQ(summary.exit_code(), 3);
  EXPECT_EQ(summary.manifest["stocks"]["corrupt_600999"]["status"], "failed");
  EXPECT_EQ(summary.manifest["stocks"]["600001"]["status"], "done");
  EXPECT_EQ(count_rows(slurp(out / "evaluation.csv"), ",MC,"), 6u);
  fs::remove_all(out);
}

TEST(RunAll, FailsFastBeforeAnyOutput) {
  auto out = scratch("failfast");
  auto cfg = fixture_config(out);
  cfg.intervals.clear();
  EXPECT_THROW(run_all(cfg), ConfigError);
  cfg = fixture_config(out);
  cfg.inputs.push_back((kFixtures / "does_not_exist.csv").string());
  EXPECT_THROW(run_all(cfg), DataError);
  cfg = fixture_config(out);
  cfg.seed.reset();
  EXPECT_THROW(run_all(cfg), ConfigError);
  EXPECT_FALSE(fs::exists(out));
}

TEST(RunAll, FiltersAreReportedNotFatal) {
  auto out = scratch("filters");
  auto cfg = fixture_config(out);
  cfg.min_states = 100;  // T=0.05 leaves about 25 states per stock
  cfg.state_counts = {50};
  auto summary = run_all(cfg);
  EXPECT_EQ(summary.failed, 0u);
  const auto filtered = slurp(out / "filtered.csv");
  EXPECT_EQ(count_rows(filtered, "T=0.05,too few states"), 3u);
  EXPECT_EQ(count_rows(filtered, "SP=50,too few states"), 3u);
  EXPECT_EQ(count_rows(slurp(out / "evaluation.csv"), "T=0.01,MC"), 3u);
  fs::remove_all(out);
}

TEST(EmitSummary, Means) {
  auto one = emit_summary({fake_stock("a", 0.6, 0.9, 0.02, 1.5)}, {}, {ModelKind::MC});
  ASSERT_EQ(one.rows.size(), 1u);
  EXPECT_EQ(one.rows[0][3], "0.6");
  EXPECT_EQ(one.rows[0][4], "0.9");
  EXPECT_EQ(one.rows[0][5], "0.02");

  auto two = emit_summary({fake_stock("a", 0.6, 0.9, 0.02, 1.5), fake_stock("b", 0.8, 0.7, 0.04, 2.5)}, {},
                          {ModelKind::MC});
  EXPECT_EQ(two.rows[0][2], "2");
  EXPECT_EQ(two.rows[0][3], "0.7");
  EXPECT_EQ(two.rows[0][7], "0.5");  // one of two stocks below 2 bits

  EXPECT_THROW(emit_summary({}), DataError);
}

TEST(Config, PrintParseRoundTrip) {
  PipelineConfig c;
  c.inputs = {"a.csv", "b.csv"};
  c.intervals = {1, 5, 10};
  c.state_counts = {100};
  c.models = {ModelKind::DK};
  c.dk.online_alpha = 0.02;
  c.rmse_truth = RmseTruth::State;
  const auto text = print_config(c);
  std::istringstream in(text);
  EXPECT_EQ(print_config(parse_config(in)), text);
}

TEST(Config, ErrorsAndHash) {
  PipelineConfig c;
  EXPECT_THROW(apply_setting(c, "no_such_key", "1"), ConfigError);
  EXPECT_THROW(apply_setting(c, "intervals", "0.015"), ConfigError);
  EXPECT_THROW(apply_setting(c, "models", "LSTM"), ConfigError);
  std::istringstream bad("intervals 0.01\n");
  EXPECT_THROW(parse_config(bad), ConfigError);

  const auto h = config_hash(c);
  auto d = c;
  d.threads = 8;
  d.output_dir = "elsewhere";
  EXPECT_EQ(config_hash(d), h);
  d.seed = 43;
  EXPECT_NE(config_hash(d), h);
}

TEST(Cli, ExitCodes) {
  const auto ticks = (kFixtures / "ticks.csv").string();
  const auto corrupt = (kFixtures / "corrupt_600999.csv").string();
  auto out = scratch("cli");
  EXPECT_EQ(run_cli("--print-config"), 0);
  EXPECT_EQ(run_cli("run-all --set bogus=1"), 1);
  EXPECT_EQ(run_cli("entropy"), 1);
  EXPECT_EQ(run_cli("run-all -i " + (kFixtures / "missing.csv").string() + " -o " + out.string()), 2);
  EXPECT_EQ(run_cli("run-all --json -i " + ticks + " " + corrupt + " -o " + out.string()), 3);
  EXPECT_TRUE(fs::exists(out / "evaluation.json"));
  EXPECT_EQ(run_cli("run-all -i " + ticks + " -o " + out.string()), 0);
  fs::remove_all(out);
}

TEST(Cli, StageByStage) {
  auto dir = scratch("stages");
  fs::create_directories(dir);
  const auto d = dir.string();
  ASSERT_EQ(run_cli("ingest -i " + (kFixtures / "ticks.csv").string() + " -o " + d + "/series"), 0);
  ASSERT_EQ(run_cli("quantize -s " + d + "/series/600001.csv -T 0.05 -o " + d + "/s.csv --scheme-out " + d +
                    "/scheme.json"),
            0);
  ASSERT_EQ(run_cli("entropy --states " + d + "/s.csv -o " + d + "/e.csv"), 0);
  ASSERT_EQ(run_cli("predictability --states " + d + "/s.csv -o " + d + "/p.csv"), 0);
  ASSERT_EQ(run_cli("predict --states " + d + "/s.csv -m MC -o " + d + "/t.csv"), 0);
  ASSERT_EQ(run_cli("evaluate --trace " + d + "/t.csv --scheme " + d + "/scheme.json --series " + d +
                    "/series/600001.csv -m MC -o " + d + "/ev.csv"),
            0);
  ASSERT_EQ(run_cli("features --series " + d + "/series/600001.csv " + d + "/series/600002.csv " + d +
                    "/series/000003.csv --metadata " + (kFixtures / "metadata.csv").string() + " -o " + d +
                    "/f.csv"),
            0);
  ASSERT_EQ(run_cli("correlate --features " + d + "/f.csv -o " + d), 0);
  EXPECT_TRUE(fs::exists(dir / "anova.csv"));

  // the stage outputs agree with the pipeline's numbers for the same stock and setting
  auto out = scratch("stages_run");
  auto cfg = fixture_config(out);
  cfg.models = {ModelKind::MC};
  run_all(cfg);
  const auto ev = slurp(dir / "ev.csv");
  const auto acc = ev.substr(ev.find('\n') + 1);
  std::istringstream row(acc);
  std::vector<std::string> cells;
  for (std::string c; std::getline(row, c, ',');) cells.push_back(c);
  ASSERT_GE(cells.size(), 6u);
  const auto eval = slurp(out / "evaluation.csv");
  EXPECT_NE(eval.find("600001,T=0.05,MC,1500," + cells[4] + "," + cells[5]), std::string::npos) << ev << eval;
  fs::remove_all(out);
  fs::remove_all(dir);
}
