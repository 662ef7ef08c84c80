#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "specinterp/confirmation.hpp"
#include "specinterp/metrics.hpp"
#include "specinterp/phrase_table.hpp"
#include "specinterp/prediction_tree.hpp"
#include "specinterp/predictor.hpp"
#include "specinterp/stream_model.hpp"

namespace si {

enum class EventKind { Emit, Diverge, Repredict, Catchup, ContextShift, Conflict, Hit, End };

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view name);

struct OutputEvent {
  EventKind kind = EventKind::Emit;
  /// Logical time of the triggering source event.
  std::int64_t t_ms = 0;
  /// Emit: emitted target tokens. Catchup: drained source span.
  Tokens toks;
  /// Emit: source tokens heard (delivered, buffered included) in this
  /// utterance. End: utterance source length.
  std::size_t src = 0;

  bool operator==(const OutputEvent&) const = default;
};

struct SessionCounters {
  std::size_t hits = 0;
  std::size_t divergences = 0;
  std::size_t conflicts = 0;
  std::size_t catchups = 0;
  std::size_t drift_events = 0;
};

// One utterance. Events are delivered into a buffer; each processing step
// takes one buffered event through advance / expand / prune / consensus /
// refine / emit. A buffer longer than buffer_limit is translated directly
// (catch-up). The emitted stream only ever grows.
//
// The predictor and phrase table must outlive the session. `table` may be
// null, in which case translations come only from the predictor and
// catch-up/finalize fall back to the source tokens.
class Session {
 public:
  // Predicts on the empty prefix to build the initial tree. `first_index`
  // is the transcript index of the utterance's first event. Throws
  // InvalidConfig for an invalid config.
  Session(const EngineConfig& config, ContextDoc context, const Predictor& predictor, const PhraseTable* table,
          std::size_t first_index = 0);

  // Delivers `ev` and, unless that triggered a catch-up, processes one
  // buffered event. Throws OutOfOrderToken unless ev.index is the next
  // expected index.
  std::vector<OutputEvent> feed(const TokenEvent& ev);
  /// Delivers `ev` without processing (simulated lag); may trigger a catch-up.
  std::vector<OutputEvent> deliver(const TokenEvent& ev);
  /// Processes the oldest buffered event; no-op on an empty buffer.
  std::vector<OutputEvent> process_one();
  /// Drains the buffer, translating it directly. Precondition: non-empty buffer.
  std::vector<OutputEvent> catchup();
  // Compares perplexity(window) with the context body's; on a ratio above
  // drift_ratio returns ContextShift and passes `window` as auxiliary
  // context to later predictions.
  std::optional<OutputEvent> context_shift_check(std::span<const Token> window, std::int64_t t_ms);
  // Processes whatever is still buffered, fills every Hole and emits the
  // rest. Requires the final event to have been delivered
  // (MissingFinalMarker otherwise). Ends with an End event.
  std::vector<OutputEvent> finalize();
  /// Treats the last delivered event as final (interactive input has no marker).
  void mark_final();

  const PredictionTree& tree() const { return tree_; }
  const TargetTemplate& target() const { return template_; }
  const Tokens& emitted() const { return emitted_; }
  const Tokens& observed() const { return observed_; }
  std::size_t buffered() const { return buffer_.size(); }
  std::size_t heard() const { return heard_; }
  const SessionCounters& counters() const { return counters_; }
  bool finished() const { return finished_; }
  const ContextDoc& context() const { return context_; }

  /// Per-utterance metrics input (emission timeline in local source counts).
  RunRecord record() const;

 private:
  std::optional<PredictionSet> predict() const;
  void rebuild(std::int64_t t_ms, std::vector<OutputEvent>& out);
  void commit(TargetTemplate fresh, std::int64_t t_ms, std::vector<OutputEvent>& out);
  void emit_ready(std::int64_t t_ms, std::vector<OutputEvent>& out);
  void drift_after_growth(std::size_t before, std::int64_t t_ms, std::vector<OutputEvent>& out);
  bool push(const TokenEvent& ev, std::vector<OutputEvent>& out);

  EngineConfig config_;
  ContextDoc context_;
  const Predictor* predictor_;
  const PhraseTable* table_;
  std::optional<double> context_perplexity_;

  PredictionTree tree_;
  TargetTemplate template_ = TargetTemplate::all_hole();
  std::deque<TokenEvent> buffer_;
  Tokens observed_;
  Tokens emitted_;
  std::vector<std::size_t> emission_src_;
  Tokens aux_;
  SessionCounters counters_;

  std::size_t next_index_ = 0;
  std::size_t heard_ = 0;
  std::int64_t last_t_ms_ = 0;
  bool final_seen_ = false;
  bool final_drained_ = false;
  bool finished_ = false;
};

}  // namespace si
