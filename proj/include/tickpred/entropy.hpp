#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "tickpred/error.hpp"
#include "tickpred/quantize.hpp"

namespace tickpred {

// Match lengths for the Lempel-Ziv entropy-rate estimator.
//
// lambda[i] is the length of the shortest substring starting at i that does
// not occur anywhere inside states[0, i). When every substring starting at i
// up to the end of the sequence does occur there, lambda[i] = (n - i) + 1,
// i.e. one past the tail. Equivalently lambda[i] = 1 + the longest prefix of
// states[i, n) that occurs entirely within states[0, i).

/// Direct scan: for every earlier start j, the common prefix of the suffixes
/// at j and i, capped so the earlier copy ends before i. Quadratic; used as
/// the reference implementation.
inline std::vector<std::uint32_t> match_lengths(std::span<const StateId> s) {
  if (s.empty()) throw DataError("match lengths of an empty sequence");
  const std::size_t n = s.size();
  std::vector<std::uint32_t> lambda(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    const std::size_t tail = n - i;
    for (std::size_t j = 0; j < i && best < tail; ++j) {
      const std::size_t cap = std::min(i - j, tail);
      if (cap <= best) continue;
      std::size_t k = 0;
      while (k < cap && s[j + k] == s[i + k]) ++k;
      best = std::max(best, k);
    }
    lambda[i] = static_cast<std::uint32_t>(best + 1);
  }
  return lambda;
}

namespace detail {

/// Online suffix automaton over StateId symbols.
class SuffixAutomaton {
 public:
  struct Node {
    std::size_t len = 0;
    std::ptrdiff_t link = -1;
    std::map<StateId, std::size_t> next;
  };

  /// Outcome of one extension; `split_from`/`clone` are set when an existing
  /// node was split, which moves its shorter strings into `clone`.
  struct Extension {
    std::ptrdiff_t split_from = -1;
    std::ptrdiff_t clone = -1;
  };

  SuffixAutomaton() { nodes_.emplace_back(); }

  void reserve(std::size_t n) { nodes_.reserve(2 * n + 1); }
  const Node& node(std::size_t v) const { return nodes_[v]; }

  std::ptrdiff_t transition(std::size_t v, StateId c) const {
    const auto& nx = nodes_[v].next;
    auto it = nx.find(c);
    return it == nx.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
  }

  Extension extend(StateId c) {
    Extension ext;
    const std::size_t cur = nodes_.size();
    nodes_.push_back(Node{nodes_[last_].len + 1, -1, {}});
    std::ptrdiff_t p = static_cast<std::ptrdiff_t>(last_);
    while (p != -1 && !nodes_[p].next.count(c)) {
      nodes_[p].next.emplace(c, cur);
      p = nodes_[p].link;
    }
    if (p == -1) {
      nodes_[cur].link = 0;
    } else {
      const std::size_t q = nodes_[p].next.at(c);
      if (nodes_[p].len + 1 == nodes_[q].len) {
        nodes_[cur].link = static_cast<std::ptrdiff_t>(q);
      } else {
        const std::size_t clone = nodes_.size();
        Node copy = nodes_[q];
        copy.len = nodes_[p].len + 1;
        nodes_.push_back(std::move(copy));
        while (p != -1) {
          auto it = nodes_[p].next.find(c);
          if (it == nodes_[p].next.end() || it->second != q) break;
          it->second = clone;
          p = nodes_[p].link;
        }
        nodes_[q].link = static_cast<std::ptrdiff_t>(clone);
        nodes_[cur].link = static_cast<std::ptrdiff_t>(clone);
        ext.split_from = static_cast<std::ptrdiff_t>(q);
        ext.clone = static_cast<std::ptrdiff_t>(clone);
      }
    }
    last_ = cur;
    return ext;
  }

 private:
  std::vector<Node> nodes_;
  std::size_t last_ = 0;
};

}  // namespace detail

/// Same contract as match_lengths, computed with an online suffix automaton
/// of the prefix while sliding a matching window: the match for i+1 is at
/// least the match for i minus its first symbol, so total work is linear in
/// n up to the per-node transition lookups.
inline std::vector<std::uint32_t> match_lengths_fast(std::span<const StateId> s) {
  if (s.empty()) throw DataError("match lengths of an empty sequence");
  const std::size_t n = s.size();
  std::vector<std::uint32_t> lambda(n);
  detail::SuffixAutomaton sam;
  sam.reserve(n);

  // (v, len): automaton node holding states[i, i + len), a string that
  // occurs in states[0, i).
  std::size_t v = 0;
  std::size_t len = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (i + len < n) {
      auto nx = sam.transition(v, s[i + len]);
      if (nx < 0) break;
      v = static_cast<std::size_t>(nx);
      ++len;
    }
    lambda[i] = static_cast<std::uint32_t>(len + 1);

    if (len > 0) {
      --len;
      const auto link = sam.node(v).link;
      if (link >= 0 && len <= sam.node(static_cast<std::size_t>(link)).len) v = static_cast<std::size_t>(link);
    }
    auto ext = sam.extend(s[i]);
    if (ext.clone >= 0 && static_cast<std::ptrdiff_t>(v) == ext.split_from &&
        len <= sam.node(static_cast<std::size_t>(ext.clone)).len)
      v = static_cast<std::size_t>(ext.clone);
  }
  return lambda;
}

enum class EntropyUnit { Bits, Nats };

struct EntropyEstimate {
  double s_est = 0.0;
  double mean_match_length = 0.0;
  std::size_t n = 0;
  std::vector<std::uint32_t> lambda;  // kept only on request
};

/// Lempel-Ziv estimate: log(n) / mean(lambda). Bits by default so the value
/// plugs straight into the Fano relation.
inline EntropyEstimate estimate_entropy(std::span<const StateId> states, EntropyUnit unit = EntropyUnit::Bits,
                                        bool keep_lambda = false) {
  if (states.size() < 2) throw DataError("entropy estimate needs at least 2 states");
  EntropyEstimate est;
  est.n = states.size();
  auto lambda = match_lengths_fast(states);
  const double total = std::accumulate(lambda.begin(), lambda.end(), 0.0);
  est.mean_match_length = total / static_cast<double>(est.n);
  const double logn = unit == EntropyUnit::Bits ? std::log2(static_cast<double>(est.n))
                                                : std::log(static_cast<double>(est.n));
  est.s_est = logn / est.mean_match_length;
  if (keep_lambda) est.lambda = std::move(lambda);
  return est;
}

inline EntropyEstimate estimate_entropy(const QuantizedSequence& seq, EntropyUnit unit = EntropyUnit::Bits,
                                        bool keep_lambda = false) {
  return estimate_entropy(std::span<const StateId>(seq.states), unit, keep_lambda);
}

}  // namespace tickpred
