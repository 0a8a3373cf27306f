#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "tickpred/error.hpp"
#include "tickpred/markov.hpp"
#include "tickpred/quantize.hpp"

namespace tickpred {

struct DiffusionKernelConfig {
  std::size_t dim = 16;
  std::size_t epochs = 20;
  double alpha0 = 0.1;
  double margin = 1.0;
  std::size_t negatives_per_step = 5;
  double online_alpha = -1.0;  // negative: alpha0 / 10
  std::uint64_t seed = 42;

  double online_rate() const { return online_alpha < 0.0 ? alpha0 / 10.0 : online_alpha; }

  void validate() const {
    if (dim < 2) throw ConfigError("diffusion kernel dimension must be at least 2");
    if (epochs < 1) throw ConfigError("diffusion kernel needs at least one epoch");
    if (!(alpha0 > 0.0)) throw ConfigError("diffusion kernel alpha0 must be positive");
    if (!std::isfinite(margin)) throw ConfigError("diffusion kernel margin must be finite");
  }
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double x = a[k] - b[k];
    d += x * x;
  }
  return d;
}

/// One margin-gated step for a (context, positive, negative) triple. When
/// d_neg - d_pos < margin the positive is pulled toward the context, the
/// negative pushed away from it, and the context moved along pos - neg, all
/// from the pre-step coordinates. Returns whether anything moved.
inline bool margin_step(std::span<double> context, std::span<double> positive, std::span<double> negative,
                        double alpha, double margin) {
  const double d_pos = squared_distance(context, positive);
  const double d_neg = squared_distance(context, negative);
  if (d_neg - d_pos >= margin) return false;
  const double step = 2.0 * alpha;
  for (std::size_t k = 0; k < context.size(); ++k) {
    const double c = context[k], p = positive[k], n = negative[k];
    positive[k] = p + step * (c - p);
    negative[k] = n - step * (c - n);
    context[k] = c + step * (p - n);
  }
  return true;
}

/// Embedding predictor: every state and every ordered pair of previous
/// states gets a point in R^dim; the prediction for a context is the state
/// nearest to the context's point.
class DiffusionKernelModel {
 public:
  explicit DiffusionKernelModel(DiffusionKernelConfig config = {}) : config_(config), rng_(config.seed) {
    config_.validate();
  }

  const DiffusionKernelConfig& config() const { return config_; }
  std::size_t state_count() const { return state_rows_.size(); }
  std::size_t context_count() const { return context_rows_.size(); }
  bool has_state(StateId s) const { return state_rows_.count(s) > 0; }
  bool has_context(const Context& c) const { return context_rows_.count(c) > 0; }

  /// Adds a state with a fresh uniform [-0.5, 0.5]^dim embedding; no-op if known.
  void register_state(StateId s) {
    if (has_state(s)) return;
    state_rows_.emplace(s, state_ids_.size());
    state_ids_.push_back(s);
    append_random(state_data_);
  }

  void register_context(const Context& c) {
    if (has_context(c)) return;
    context_rows_.emplace(c, context_rows_.size());
    append_random(context_data_);
  }

  std::span<double> state_embedding(StateId s) { return row(state_data_, state_rows_.at(s)); }
  std::span<const double> state_embedding(StateId s) const { return row(state_data_, state_rows_.at(s)); }
  std::span<double> context_embedding(const Context& c) { return row(context_data_, context_rows_.at(c)); }
  std::span<const double> context_embedding(const Context& c) const { return row(context_data_, context_rows_.at(c)); }

  void set_state_embedding(StateId s, std::span<const double> z) { copy_into(state_embedding(s), z); }
  void set_context_embedding(const Context& c, std::span<const double> z) { copy_into(context_embedding(c), z); }

  /// Nearest registered state to the context's point. An unseen context is
  /// placed at the mean of its known member states; with neither member
  /// known the most frequently observed state is returned.
  StateId predict(const Context& ctx) const {
    if (state_ids_.empty()) throw DataError("diffusion kernel model has no states");
    if (has_context(ctx)) return nearest(context_embedding(ctx));

    std::vector<double> probe(config_.dim, 0.0);
    int members = 0;
    for (StateId m : {ctx.prev2, ctx.prev1}) {
      if (!has_state(m)) continue;
      auto z = state_embedding(m);
      for (std::size_t k = 0; k < probe.size(); ++k) probe[k] += z[k];
      ++members;
    }
    if (members == 0) return observed_.empty() ? *std::min_element(state_ids_.begin(), state_ids_.end()) : observed_.mode();
    for (auto& x : probe) x /= members;
    return nearest(probe);
  }

  /// Margin steps against `negatives_per_step` states drawn uniformly from
  /// the registered states other than the positive. Both ids must be known.
  void train_step(const Context& ctx, StateId positive, double alpha) {
    const std::size_t others = state_ids_.size() - 1;
    if (others == 0 || alpha == 0.0) return;
    auto z_c = context_embedding(ctx);
    auto z_i = state_embedding(positive);
    const std::size_t pos_row = state_rows_.at(positive);
    for (std::size_t k = 0; k < config_.negatives_per_step; ++k) {
      std::uniform_int_distribution<std::size_t> pick(0, others - 1);
      std::size_t r = pick(rng_);
      if (r >= pos_row) ++r;
      margin_step(z_c, z_i, row(state_data_, r), alpha, config_.margin);
    }
  }

  /// Online step after observing `actual` in context `ctx`.
  void update(const Context& ctx, StateId actual) {
    register_state(ctx.prev2);
    register_state(ctx.prev1);
    register_state(actual);
    register_context(ctx);
    observed_.add(actual);
    train_step(ctx, actual, config_.online_rate());
  }

  void observe_count(StateId s) { observed_.add(s); }

 private:
  std::span<double> row(std::vector<double>& data, std::size_t r) {
    return std::span<double>(data).subspan(r * config_.dim, config_.dim);
  }
  std::span<const double> row(const std::vector<double>& data, std::size_t r) const {
    return std::span<const double>(data).subspan(r * config_.dim, config_.dim);
  }

  void copy_into(std::span<double> dst, std::span<const double> src) {
    if (src.size() != dst.size()) throw ConfigError("embedding has wrong dimension");
    std::copy(src.begin(), src.end(), dst.begin());
  }

  void append_random(std::vector<double>& data) {
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (std::size_t k = 0; k < config_.dim; ++k) data.push_back(u(rng_));
  }

  StateId nearest(std::span<const double> point) const {
    StateId best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < state_ids_.size(); ++r) {
      const double d = squared_distance(point, row(state_data_, r));
      const StateId s = state_ids_[r];
      if (d < best_d || (d == best_d && s < best)) {
        best_d = d;
        best = s;
      }
    }
    return best;
  }

  DiffusionKernelConfig config_;
  std::mt19937_64 rng_;
  std::unordered_map<StateId, std::size_t> state_rows_;
  std::vector<StateId> state_ids_;
  std::vector<double> state_data_;
  std::unordered_map<Context, std::size_t, ContextHash> context_rows_;
  std::vector<double> context_data_;
  CountTable observed_;
};

/// Batch training on a prefix: registers every state and context (ascending
/// id order, so initialisation is reproducible), then runs `epochs` passes
/// with the rate decaying linearly from alpha0.
inline DiffusionKernelModel dk_train(std::span<const StateId> prefix, const DiffusionKernelConfig& config = {}) {
  if (prefix.size() < 3) throw DataError("diffusion kernel training needs at least 3 states");
  DiffusionKernelModel model(config);

  std::vector<StateId> states(prefix.begin(), prefix.end());
  std::sort(states.begin(), states.end());
  states.erase(std::unique(states.begin(), states.end()), states.end());
  for (StateId s : states) model.register_state(s);

  std::vector<Context> contexts;
  for (std::size_t t = 2; t < prefix.size(); ++t) contexts.push_back({prefix[t - 2], prefix[t - 1]});
  std::sort(contexts.begin(), contexts.end());
  contexts.erase(std::unique(contexts.begin(), contexts.end()), contexts.end());
  for (const auto& c : contexts) model.register_context(c);

  for (std::size_t t = 2; t < prefix.size(); ++t) model.observe_count(prefix[t]);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double alpha =
        config.alpha0 * (1.0 - static_cast<double>(epoch) / static_cast<double>(config.epochs));
    for (std::size_t t = 2; t < prefix.size(); ++t)
      model.train_step({prefix[t - 2], prefix[t - 1]}, prefix[t], alpha);
  }
  return model;
}

inline StateId dk_predict(const DiffusionKernelModel& model, const Context& ctx) { return model.predict(ctx); }

inline void dk_update(DiffusionKernelModel& model, const Context& ctx, StateId actual) { model.update(ctx, actual); }

}  // namespace tickpred
