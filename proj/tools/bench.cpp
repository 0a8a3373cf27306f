// Throughput of the per-stock path (filter, quantize, entropy, bound, MC and
// DK protocols, evaluation) on a synthetic random walk.
#include <chrono>
#include <cstdio>
#include <random>

#include <CLI11.hpp>

#include "tickpred/pipeline.hpp"

using namespace tickpred;

int main(int argc, char** argv) {
  CLI::App app{"Per-stock pipeline throughput"};
  std::size_t days = 5, per_day = 4800, repeats = 3;
  std::uint64_t seed = 1;
  double budget = 50000.0;
  app.add_option("--days", days)->capture_default_str();
  app.add_option("--ticks-per-day", per_day)->capture_default_str();
  app.add_option("--repeats", repeats)->capture_default_str();
  app.add_option("--seed", seed)->capture_default_str();
  app.add_option("--budget", budget, "ticks per second")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> step({1, 2, 4, 2, 1});
  PriceSeries s;
  s.stock_code = "BENCH";
  std::int64_t price = 1000;
  EpochSeconds t0 = 1609752600;  // 2021-01-04 09:30 UTC
  for (std::size_t d = 0; d < days; ++d)
    for (std::size_t i = 0; i < per_day; ++i) {
      price = std::max<std::int64_t>(100, price + step(rng) - 2);
      s.points.push_back({t0 + static_cast<EpochSeconds>(d * kSecondsPerDay + i * 3), Price{price}});
    }
  s.detect_days();

  PipelineConfig cfg;
  double best = 0.0;
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    auto out = process_stock(s, cfg);
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double rate = static_cast<double>(s.size()) / sec;
    best = std::max(best, rate);
    std::printf("run %zu: %zu ticks, %zu settings, %.3f s, %.0f ticks/s\n", r + 1, s.size(), out.result.settings.size(),
                sec, rate);
  }
  std::printf("%s best %.0f ticks/s/core (budget %.0f)\n", best >= budget ? "WITHIN" : "BELOW", best, budget);
  return 0;
}
