#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <unordered_map>

#include "tickpred/error.hpp"
#include "tickpred/quantize.hpp"

namespace tickpred {

/// Second-order context: the two most recent states, oldest first.
struct Context {
  StateId prev2 = 0;
  StateId prev1 = 0;

  friend bool operator==(const Context&, const Context&) = default;
  friend auto operator<=>(const Context&, const Context&) = default;
};

struct ContextHash {
  std::size_t operator()(const Context& c) const noexcept {
    auto h = static_cast<std::uint64_t>(c.prev2) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::uint64_t>(c.prev1) + 0x7F4A7C159E3779B9ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

/// Occurrence counts of next states with an incrementally maintained mode.
/// Counts only grow, so after incrementing s the mode is either the old
/// mode or s; ties go to the smaller state id.
class CountTable {
 public:
  void add(StateId s, std::uint64_t by = 1) {
    auto& c = counts_[s];
    c += by;
    total_ += by;
    if (c > mode_count_ || (c == mode_count_ && s < mode_)) {
      mode_ = s;
      mode_count_ = c;
    }
  }

  std::uint64_t count(StateId s) const {
    auto it = counts_.find(s);
    return it == counts_.end() ? 0 : it->second;
  }

  bool empty() const { return total_ == 0; }
  std::uint64_t total() const { return total_; }
  StateId mode() const { return mode_; }
  const std::unordered_map<StateId, std::uint64_t>& counts() const { return counts_; }

 private:
  std::unordered_map<StateId, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
  StateId mode_ = 0;
  std::uint64_t mode_count_ = 0;
};

/// Second-order Markov chain predictor with an order-1 and a global
/// fallback. Each observed transition increments one entry in every table.
class MarkovModel {
 public:
  static constexpr int order = 2;

  void observe(const Context& ctx, StateId next) {
    counts2_[ctx].add(next);
    counts1_[ctx.prev1].add(next);
    global_.add(next);
  }

  /// Most frequent continuation of ctx; falls back to the continuation of
  /// the last state alone, then to the overall most frequent state.
  StateId predict(const Context& ctx) const {
    if (auto it = counts2_.find(ctx); it != counts2_.end()) return it->second.mode();
    if (auto it = counts1_.find(ctx.prev1); it != counts1_.end()) return it->second.mode();
    if (global_.empty()) throw DataError("Markov model has not observed any transition");
    return global_.mode();
  }

  std::uint64_t count2(const Context& ctx, StateId next) const {
    auto it = counts2_.find(ctx);
    return it == counts2_.end() ? 0 : it->second.count(next);
  }
  std::uint64_t count1(StateId prev, StateId next) const {
    auto it = counts1_.find(prev);
    return it == counts1_.end() ? 0 : it->second.count(next);
  }
  std::uint64_t global_count(StateId s) const { return global_.count(s); }
  std::uint64_t transitions() const { return global_.total(); }
  bool knows(StateId s) const { return global_.count(s) > 0 || counts1_.count(s) > 0; }

 private:
  std::unordered_map<Context, CountTable, ContextHash> counts2_;
  std::unordered_map<StateId, CountTable> counts1_;
  CountTable global_;
};

inline MarkovModel mc_train(std::span<const StateId> prefix) {
  if (prefix.size() < 3) throw DataError("Markov training needs at least 3 states");
  MarkovModel model;
  for (std::size_t t = 2; t < prefix.size(); ++t) model.observe({prefix[t - 2], prefix[t - 1]}, prefix[t]);
  return model;
}

inline StateId mc_predict(const MarkovModel& model, const Context& ctx) { return model.predict(ctx); }

inline void mc_update(MarkovModel& model, const Context& ctx, StateId actual) { model.observe(ctx, actual); }

}  // namespace tickpred
