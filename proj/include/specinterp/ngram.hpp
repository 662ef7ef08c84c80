#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "specinterp/prediction.hpp"
#include "specinterp/stream_model.hpp"

namespace si {

inline constexpr const char* kStartSymbol = "<s>";

/// Backoff multiplier applied once per dropped history token.
inline constexpr double kBackoffFactor = 0.4;

// Additive-smoothed n-gram model. Sentences are padded with order-1 start
// symbols and terminated with kEndSymbol. The conditional at the highest
// order is (c(h,w) + alpha) / (c(h) + alpha*V) over the full vocabulary
// (end symbol included, start symbol excluded). An unseen history backs
// off to the next shorter one; the backed-off row is renormalized.
class NgramModel {
 public:
  using Id = std::uint32_t;

  /// Empty model: order 1, vocabulary {</s>}, no counts.
  NgramModel();

  static NgramModel train(std::span<const Tokens> corpus, std::size_t order, double alpha = 0.1);

  std::size_t order() const { return order_; }
  double alpha() const { return alpha_; }
  /// Sorted byte-wise; indices are token ids.
  const Tokens& vocab() const { return vocab_; }
  std::size_t vocab_size() const { return vocab_.size(); }
  std::optional<Id> id(std::string_view token) const;
  Id end_id() const { return end_id_; }

  /// Raw count of `token` after `history` (exactly order-1 tokens, "<s>" allowed).
  std::uint64_t count(std::span<const Token> history, std::string_view token) const;

  // Smoothed distribution over vocab() given the preceding tokens of the
  // sentence (no padding needed). Unknown context tokens make the history
  // unseen.
  std::vector<double> conditional(std::span<const Token> context) const;
  void conditional_ids(std::span<const Id> context, std::vector<double>& out) const;

  // P(token | context). Out-of-vocabulary tokens get the zero-count value
  // alpha / (c(h) + alpha*V) at the history level that was found.
  double probability(std::span<const Token> context, std::string_view token) const;

  std::vector<Id> to_ids(std::span<const Token> tokens) const;

  std::string serialize() const;
  static NgramModel deserialize(std::string_view text);

  bool operator==(const NgramModel&) const = default;

 private:
  struct Row {
    std::uint64_t total = 0;
    std::vector<std::pair<Id, std::uint64_t>> counts;  // sorted by id
    bool operator==(const Row&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const std::vector<Id>& key) const noexcept;
  };
  using Level = std::unordered_map<std::vector<Id>, Row, KeyHash>;

  Id start_id() const { return static_cast<Id>(vocab_.size()); }
  Id unknown_id() const { return static_cast<Id>(vocab_.size() + 1); }
  // Finds the longest seen suffix of the padded history; returns the row
  // (nullptr when even the empty history is unseen) and how many tokens
  // were dropped.
  std::pair<const Row*, std::size_t> lookup(std::span<const Id> context) const;

  std::size_t order_ = 1;
  double alpha_ = 0.1;
  Tokens vocab_;
  Id end_id_ = 0;
  std::vector<Level> levels_;  // levels_[m]: histories of length m
};

// Best-first enumeration of continuations after `prefix`: each hypothesis
// ends with the end symbol (complete) or is cut at `max_len` tokens
// (open); the end symbol counts toward max_len and is not stored in the
// continuation. Probability is the left-to-right product of conditionals.
// The bare end-of-utterance hypothesis has no tokens and is left in other_mass.
// Returns the top `k` by (p desc, ranking_key asc); translations are empty.
PredictionSet ngram_continuations(const NgramModel& model, std::span<const Token> prefix, std::size_t k,
                                  std::size_t max_len);

/// exp(-mean log P) over `window`, scored as a start-padded sentence.
double perplexity(const NgramModel& model, std::span<const Token> window);

/// One sentence of whitespace-separated tokens per line; blank lines skipped.
std::vector<Tokens> read_corpus(std::string_view text);

}  // namespace si
