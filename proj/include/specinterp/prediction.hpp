#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "specinterp/stream_model.hpp"

namespace si {

/// Symbol the predictors use internally for end of utterance. Never part
/// of transcript surfaces.
inline constexpr const char* kEndSymbol = "</s>";

/// One hypothesised continuation of the observed source prefix.
struct Prediction {
  Tokens continuation;
  double p = 0.0;
  /// Target text for the whole hypothetical sentence (prefix + continuation).
  Tokens translation;
  /// True when the continuation runs to the end of the utterance; false when
  /// it was cut at the predictor's horizon and may be extended.
  bool complete = true;

  bool operator==(const Prediction&) const = default;
};

// Ranked continuations plus the residual "other" mass. Items are sorted by
// p descending; equal p is ordered by ranking_key() ascending.
struct PredictionSet {
  std::vector<Prediction> items;
  double other_mass = 1.0;
  /// Length of the source prefix this set was computed for.
  std::size_t prefix_len = 0;

  bool operator==(const PredictionSet&) const = default;
};

/// A weighted full-sentence target hypothesis (a named tree leaf).
struct Hypothesis {
  Tokens translation;
  double mass = 0.0;
  /// False when the underlying source hypothesis was truncated.
  bool complete = true;

  bool operator==(const Hypothesis&) const = default;
};

/// Continuation tokens, terminated by kEndSymbol when the hypothesis is complete.
Tokens ranking_key(const Prediction& p);

/// Strict weak order used for every PredictionSet: p desc, then ranking_key asc.
bool ranks_before(const Prediction& a, const Prediction& b);

// Sorts, keeps the best `k`, and sets other_mass = 1 - sum(p). Does not
// validate; see validate_prediction_set().
PredictionSet make_prediction_set(std::vector<Prediction> items, std::size_t k, std::size_t prefix_len = 0);

/// The empty set: no named items, other_mass = 1.
PredictionSet no_prediction(std::size_t prefix_len = 0);

/// One message per violated invariant; empty when valid. `k == 0` skips the size check.
std::vector<std::string> validate_prediction_set(const PredictionSet& ps, std::size_t k = 0);

}  // namespace si
