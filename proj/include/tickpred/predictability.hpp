#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>

#include "tickpred/error.hpp"

namespace tickpred {

/// Binary entropy in bits with 0 log 0 = 0.
inline double binary_entropy(double p) {
  double h = 0.0;
  if (p > 0.0 && p < 1.0) h = -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
  return h;
}

/// Right-hand side of the Fano relation, g(pi) = H(pi) + (1 - pi) log2(N - 1).
/// Strictly decreasing on [1/N, 1] from log2(N) down to 0.
inline double fano_objective(double pi, std::int64_t n_states) {
  const double tail = n_states > 1 ? (1.0 - pi) * std::log2(static_cast<double>(n_states - 1)) : 0.0;
  return binary_entropy(pi) + tail;
}

/// Counts solves whose entropy fell outside [0, log2 N] and was clamped.
inline std::atomic<std::uint64_t>& fano_clamp_counter() {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}

/// Predictability upper bound: the root of g(pi) = S on the branch
/// [1/N, 1]. S <= 0 gives 1 and S >= log2 N gives 1/N.
inline double fano_solve(double entropy_bits, std::int64_t n_states) {
  if (n_states < 1) throw ConfigError("Fano bound needs at least one state, got " + std::to_string(n_states));
  if (std::isnan(entropy_bits)) throw DataError("Fano bound of NaN entropy");
  if (n_states == 1) return 1.0;
  if (entropy_bits <= 0.0) {
    if (entropy_bits < 0.0) ++fano_clamp_counter();
    return 1.0;
  }
  const double lo_pi = 1.0 / static_cast<double>(n_states);
  if (entropy_bits >= std::log2(static_cast<double>(n_states))) {
    if (entropy_bits > std::log2(static_cast<double>(n_states))) ++fano_clamp_counter();
    return lo_pi;
  }
  double lo = lo_pi;  // g(lo) >= S
  double hi = 1.0;    // g(hi) <= S
  // Bisect to floating-point resolution; the objective is steep near 1, so
  // stopping at a fixed tolerance in pi can leave a visible residual in S.
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (fano_objective(mid, n_states) > entropy_bits)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct PredictabilityReport {
  std::string stock_code;
  double s_est = 0.0;
  std::int64_t n_states = 0;
  double pi_max = 0.0;
};

inline PredictabilityReport predictability(std::string stock_code, double s_est, std::int64_t n_states) {
  return {std::move(stock_code), s_est, n_states, fano_solve(s_est, n_states)};
}

}  // namespace tickpred
