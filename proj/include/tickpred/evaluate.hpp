#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>

#include "tickpred/error.hpp"
#include "tickpred/protocol.hpp"
#include "tickpred/quantize.hpp"

namespace tickpred {

/// Ground truth for the price-space error: the raw observed price or the
/// midpoint of the actual state.
enum class RmseTruth { Raw, State };

struct EvaluationReport {
  std::string stock_code;
  ModelKind model = ModelKind::MC;
  std::string scheme;  // QuantizationScheme::label()
  double acc = 0.0;
  double rmse = 0.0;
  double rmse_price_ratio = 0.0;  // permille; 0 until rmse_ratio is applied
  std::size_t n_test = 0;
};

inline double accuracy(const PredictionTrace& trace) {
  if (trace.empty()) throw DataError("accuracy of an empty trace");
  std::size_t correct = 0;
  for (const auto& p : trace.predictions) correct += p.predicted == p.actual;
  return static_cast<double>(correct) / static_cast<double>(trace.size());
}

/// Root mean squared difference between the predicted state's midpoint and
/// either raw_prices[k] (aligned with the trace) or the actual state's
/// midpoint when no prices are given.
inline double rmse(const PredictionTrace& trace, const QuantizationScheme& scheme,
                   std::optional<std::span<const double>> raw_prices = std::nullopt) {
  if (trace.empty()) throw DataError("RMSE of an empty trace");
  if (raw_prices && raw_prices->size() != trace.size())
    throw DataError("raw prices (" + std::to_string(raw_prices->size()) + ") not aligned with trace (" +
                    std::to_string(trace.size()) + ")");
  double sum = 0.0;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const auto& p = trace.predictions[k];
    const double truth = raw_prices ? (*raw_prices)[k] : scheme.representative(p.actual);
    const double diff = truth - scheme.representative(p.predicted);
    sum += diff * diff;
  }
  return std::sqrt(sum / static_cast<double>(trace.size()));
}

/// RMSE relative to the series' average price, in permille.
inline double rmse_ratio(double rmse_cny, double avgprice) {
  if (!(avgprice > 0.0)) throw DataError("average price must be positive for the RMSE ratio");
  return 1000.0 * rmse_cny / avgprice;
}

inline double rmse_ratio(const EvaluationReport& report, double avgprice) { return rmse_ratio(report.rmse, avgprice); }

/// ACC, RMSE and (when avgprice > 0) the permille ratio for one trace.
/// `series_prices` is the whole series; the slice matching the trace is used
/// when truth is Raw.
inline EvaluationReport evaluate_trace(const PredictionTrace& trace, const QuantizationScheme& scheme,
                                       RmseTruth truth, std::span<const double> series_prices = {},
                                       double avgprice = 0.0) {
  EvaluationReport r;
  r.stock_code = trace.stock_code;
  r.model = trace.model;
  r.scheme = scheme.label();
  r.n_test = trace.size();
  r.acc = accuracy(trace);
  if (truth == RmseTruth::Raw) {
    if (series_prices.size() < trace.start_index + trace.size())
      throw DataError("price series shorter than the trace");
    r.rmse = rmse(trace, scheme, series_prices.subspan(trace.start_index, trace.size()));
  } else {
    r.rmse = rmse(trace, scheme);
  }
  if (avgprice > 0.0) r.rmse_price_ratio = rmse_ratio(r.rmse, avgprice);
  return r;
}

}  // namespace tickpred
