#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "specinterp/ngram.hpp"
#include "specinterp/phrase_table.hpp"
#include "specinterp/prediction.hpp"
#include "specinterp/stream_model.hpp"

namespace si {

// A continuation predictor. Implementations are immutable once built and
// predict() may be called concurrently.
class Predictor {
 public:
  virtual ~Predictor() = default;

  // At most `k` ranked continuations of `prefix`. std::nullopt is the
  // NoPrediction outcome; the engine treats it as other_mass = 1. `aux`
  // carries the recent source window after a context shift.
  virtual std::optional<PredictionSet> predict(const ContextDoc& context, std::span<const Token> prefix,
                                               std::size_t k, std::span<const Token> aux = {}) const = 0;

  /// Perplexity of `window` under the backend's model, if it has one.
  virtual std::optional<double> perplexity(std::span<const Token> window) const;

  virtual std::string_view name() const = 0;
};

/// Context documents and canned prediction sets keyed by (context id, exact prefix).
struct ScriptedFixture {
  struct Entry {
    std::string context;
    Tokens prefix;
    std::vector<Prediction> items;
  };
  std::vector<ContextDoc> contexts;
  std::vector<Entry> entries;

  // Format:
  // {"contexts":[{"id":"..","body":[..]}],
  //  "predictions":[{"context":"..","prefix":[..],
  //                  "items":[{"cont":[..],"p":0.4,"tr":[..],"open":false}]}]}
  // "open" is optional (default false). Throws si::Error(Fixture) listing
  // every violation.
  static ScriptedFixture parse(std::string_view json_text);
  /// Every violation in the file; empty when it loads cleanly.
  static std::vector<std::string> validate(std::string_view json_text);

  const ContextDoc* find_context(std::string_view id) const;
};

class ScriptedPredictor final : public Predictor {
 public:
  explicit ScriptedPredictor(ScriptedFixture fixture);

  std::optional<PredictionSet> predict(const ContextDoc& context, std::span<const Token> prefix, std::size_t k,
                                       std::span<const Token> aux = {}) const override;
  std::string_view name() const override { return "scripted"; }

  const ScriptedFixture& fixture() const { return fixture_; }

 private:
  ScriptedFixture fixture_;
  std::map<std::pair<std::string, Tokens>, std::size_t> index_;
};

// n-gram continuations; each hypothesis is translated by the phrase table
// (whole sentence for complete hypotheses, the stable part otherwise).
// Without a table the translation is the source sentence itself.
class NgramPredictor final : public Predictor {
 public:
  NgramPredictor(std::shared_ptr<const NgramModel> model, std::shared_ptr<const PhraseTable> table,
                 std::size_t max_len = 4);

  std::optional<PredictionSet> predict(const ContextDoc& context, std::span<const Token> prefix, std::size_t k,
                                       std::span<const Token> aux = {}) const override;
  std::optional<double> perplexity(std::span<const Token> window) const override;
  std::string_view name() const override { return "ngram"; }

  const NgramModel& model() const { return *model_; }

 private:
  std::shared_ptr<const NgramModel> model_;
  std::shared_ptr<const PhraseTable> table_;
  std::size_t max_len_;
};

enum class RemoteFailure { Unreachable, MalformedResponse, Timeout };

class RemoteError : public std::runtime_error {
 public:
  RemoteError(RemoteFailure failure, const std::string& what) : std::runtime_error(what), failure_(failure) {}
  RemoteFailure failure() const noexcept { return failure_; }

 private:
  RemoteFailure failure_;
};

// HTTP backend. Request body: {"context_id":..,"prefix":[..],"k":N} plus
// "aux":[..] when non-empty, POSTed to `<endpoint><path>`. Response:
// {"items":[{"cont":[..],"p":..,"tr":[..]}]}. Reported probabilities that
// sum past 1 are rescaled to sum to exactly 1.
class RemotePredictor final : public Predictor {
 public:
  /// `endpoint` is scheme://host:port, e.g. "http://127.0.0.1:8080".
  RemotePredictor(std::string endpoint, std::chrono::milliseconds budget, std::string path = "/predict");

  /// Throws RemoteError.
  PredictionSet request(const ContextDoc& context, std::span<const Token> prefix, std::size_t k,
                        std::span<const Token> aux = {}) const;

  std::optional<PredictionSet> predict(const ContextDoc& context, std::span<const Token> prefix, std::size_t k,
                                       std::span<const Token> aux = {}) const override;
  std::string_view name() const override { return "remote"; }

 private:
  std::string endpoint_;
  std::chrono::milliseconds budget_;
  std::string path_;
};

// Parses a remote response body into a PredictionSet (top k, clamped).
// Throws RemoteError(MalformedResponse).
PredictionSet parse_remote_response(std::string_view body, std::size_t k, std::size_t prefix_len);

}  // namespace si
