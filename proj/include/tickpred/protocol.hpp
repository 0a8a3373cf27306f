#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tickpred/diffusion_kernel.hpp"
#include "tickpred/error.hpp"
#include "tickpred/markov.hpp"

namespace tickpred {

enum class ModelKind { MC, DK };

inline std::string to_string(ModelKind kind) { return kind == ModelKind::MC ? "MC" : "DK"; }

inline ModelKind parse_model_kind(std::string_view text) {
  if (text == "mc" || text == "MC") return ModelKind::MC;
  if (text == "dk" || text == "DK") return ModelKind::DK;
  throw ConfigError("unknown model '" + std::string(text) + "' (expected mc or dk)");
}

struct Prediction {
  StateId predicted = 0;
  StateId actual = 0;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// Predictions for indices start_index, start_index + 1, ... of a sequence.
struct PredictionTrace {
  std::string stock_code;
  ModelKind model = ModelKind::MC;
  std::size_t start_index = 0;
  std::vector<Prediction> predictions;

  std::size_t size() const { return predictions.size(); }
  bool empty() const { return predictions.empty(); }
  friend bool operator==(const PredictionTrace&, const PredictionTrace&) = default;
};

/// Trains on the first `train_days` days, then for every later index
/// predicts from the previous two states, records (predicted, actual) and
/// feeds the actual state back into the model.
inline PredictionTrace run_protocol(std::span<const StateId> states, std::span<const std::size_t> day_boundaries,
                                    ModelKind kind, const DiffusionKernelConfig& dk_config = {},
                                    std::size_t train_days = 1, std::string stock_code = {}) {
  if (train_days < 1) throw ConfigError("at least one training day is required");
  if (day_boundaries.size() < train_days + 1)
    throw DataError("protocol needs at least " + std::to_string(train_days + 1) + " trading days, got " +
                    std::to_string(day_boundaries.size()));
  const std::size_t start = day_boundaries[train_days];
  if (start > states.size()) throw DataError("day boundary past the end of the sequence");
  auto prefix = states.first(start);

  PredictionTrace trace;
  trace.stock_code = std::move(stock_code);
  trace.model = kind;
  trace.start_index = start;
  trace.predictions.reserve(states.size() - start);

  auto loop = [&](auto& model, auto predict, auto update) {
    for (std::size_t t = start; t < states.size(); ++t) {
      const Context ctx{states[t - 2], states[t - 1]};
      trace.predictions.push_back({predict(model, ctx), states[t]});
      update(model, ctx, states[t]);
    }
  };

  if (kind == ModelKind::MC) {
    auto model = mc_train(prefix);
    loop(model, mc_predict, mc_update);
  } else {
    auto model = dk_train(prefix, dk_config);
    loop(model, dk_predict, dk_update);
  }
  return trace;
}

}  // namespace tickpred
