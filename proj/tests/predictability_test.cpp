#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "tickpred/predictability.hpp"

using namespace tickpred;

TEST(FanoSolve, ExactCases) {
  EXPECT_NEAR(fano_solve(0.0, 5), 1.0, 1e-12);
  EXPECT_NEAR(fano_solve(1.0, 2), 0.5, 1e-9);
  EXPECT_EQ(fano_solve(3.0, 1), 1.0);
}

TEST(FanoSolve, TwoBitsTenStates) {
  // Bisection oracle (independent, float64): 0.66062806574...
  const double pi = fano_solve(2.0, 10);
  EXPECT_NEAR(pi, 0.6606280657, 1e-9);
  EXPECT_NEAR(fano_objective(pi, 10), 2.0, 1e-10);
}

TEST(FanoSolve, ClampsOutOfRangeEntropy) {
  const auto before = fano_clamp_counter().load();
  EXPECT_NEAR(fano_solve(5.0, 4), 0.25, 1e-15);
  EXPECT_EQ(fano_solve(-0.1, 4), 1.0);
  EXPECT_EQ(fano_clamp_counter().load(), before + 2);
  EXPECT_NEAR(fano_solve(2.0, 4), 0.25, 1e-15);  // exactly log2 N: not counted
  EXPECT_EQ(fano_clamp_counter().load(), before + 2);
}

TEST(FanoSolve, InvalidStateCount) { EXPECT_THROW(fano_solve(1.0, 0), ConfigError); }

TEST(FanoObjective, EndpointsAndMonotone) {
  for (std::int64_t n : {2, 3, 5, 10, 100, 5000}) {
    const double lo = 1.0 / static_cast<double>(n);
    EXPECT_NEAR(fano_objective(lo, n), std::log2(static_cast<double>(n)), 1e-12);
    EXPECT_NEAR(fano_objective(1.0, n), 0.0, 1e-15);
    double prev = fano_objective(lo, n);
    for (int k = 1; k <= 200; ++k) {
      const double pi = lo + (1.0 - lo) * k / 200.0;
      const double g = fano_objective(pi, n);
      EXPECT_LT(g, prev + 1e-15);
      prev = g;
    }
  }
}

TEST(FanoSolve, ResidualOnRandomPairs) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::int64_t> states(2, 2000);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto n = states(rng);
    const double s = u(rng) * std::log2(static_cast<double>(n));
    const double pi = fano_solve(s, n);
    EXPECT_GE(pi, 1.0 / static_cast<double>(n));
    EXPECT_LE(pi, 1.0);
    EXPECT_LT(std::abs(fano_objective(pi, n) - s), 1e-9) << "S=" << s << " N=" << n;
  }
}

TEST(FanoSolve, MonotoneInEntropyAndStates) {
  for (std::int64_t n : {3, 10, 50}) {
    double prev = 1.0;
    for (int k = 0; k <= 100; ++k) {
      const double pi = fano_solve(k / 100.0 * std::log2(static_cast<double>(n)), n);
      EXPECT_LE(pi, prev + 1e-12);
      prev = pi;
    }
  }
  // with S fixed, a larger alphabet leaves more room for the error term, so the bound rises
  for (double s : {0.3, 1.0, 2.5}) {
    double prev = 0.0;
    for (std::int64_t n = 2; n < 400; ++n) {
      if (std::log2(static_cast<double>(n)) <= s) continue;
      const double pi = fano_solve(s, n);
      EXPECT_GE(pi, prev - 1e-12);
      prev = pi;
    }
  }
}

TEST(Predictability, Report) {
  auto r = predictability("000001", 0.0, 12);
  EXPECT_EQ(r.stock_code, "000001");
  EXPECT_EQ(r.n_states, 12);
  EXPECT_EQ(r.pi_max, 1.0);
}
