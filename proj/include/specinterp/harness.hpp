#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specinterp/engine.hpp"
#include "specinterp/metrics.hpp"
#include "specinterp/phrase_table.hpp"
#include "specinterp/predictor.hpp"
#include "specinterp/stream_model.hpp"

namespace si {

// Events delivered per logical tick, e.g. "3" or "1,1,4". The last value
// repeats for every later tick. The engine processes one buffered event
// per tick, so a profile above 1 builds up a backlog.
class LagProfile {
 public:
  LagProfile() = default;
  explicit LagProfile(std::vector<std::size_t> per_tick);
  /// Throws InvalidConfig on an empty list, a zero or a non-number.
  static LagProfile parse(std::string_view text);
  std::size_t at(std::size_t tick) const;
  const std::vector<std::size_t>& per_tick() const { return per_tick_; }

 private:
  std::vector<std::size_t> per_tick_{1};
};

/// One event-log entry: the engine event plus the utterance it belongs to.
struct LoggedEvent {
  std::size_t utterance = 0;
  OutputEvent event;

  bool operator==(const LoggedEvent&) const = default;
};

struct ReplayResult {
  std::vector<LoggedEvent> events;
  /// Whole-transcript metrics input: emission_src counts source tokens
  /// heard since the start of the transcript.
  RunRecord record;
  SessionReport report;
};

// Replays every utterance of `transcript` as its own session, all sharing
// `context`. Ticks run across utterance boundaries; within a tick the first
// delivery that finds the one-event processing budget is fed, the others
// are only delivered. Catch-up does not use the budget. An utterance is
// finalized as soon as its final event is delivered.
ReplayResult replay(const Transcript& transcript, const EngineConfig& config, const Predictor& predictor,
                    const PhraseTable* table, const ContextDoc& context, const LagProfile& lag = {});

// JSON lines, one event per line, e.g.
//   {"kind":"emit","utt":0,"t_ms":1200,"toks":["Yesterday",",","I"],"src":5}
// "toks" is written for emit, "span" for catchup, "src" for emit and end.
std::string serialize_event_log(const std::vector<LoggedEvent>& events);
/// Throws MalformedRecord with the line number.
std::vector<LoggedEvent> parse_event_log(std::string_view text);
/// Rebuilds the metrics input from a log alone.
RunRecord record_from_log(const std::vector<LoggedEvent>& events, const std::optional<Tokens>& reference);

/// Throws Io.
std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file, then renames over `path`. Throws Io.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

enum class BackendKind { Scripted, Ngram, Remote };
std::optional<BackendKind> parse_backend_kind(std::string_view name);

struct RunSpec {
  std::filesystem::path transcript;
  std::optional<std::filesystem::path> config;
  BackendKind backend = BackendKind::Scripted;
  std::optional<std::filesystem::path> fixtures;
  std::optional<std::filesystem::path> model;
  std::optional<std::filesystem::path> phrase_table;
  /// Scripted: fixture context to use (default: the first one). Remote: id sent to the server.
  std::optional<std::string> context_id;
  /// n-gram / remote: whitespace-separated context body.
  std::optional<std::filesystem::path> context_file;
  std::string endpoint;
  std::chrono::milliseconds budget{200};
  std::size_t max_len = 4;
  LagProfile lag;
  std::optional<std::filesystem::path> out_events;
  std::optional<std::filesystem::path> out_report;
};

/// Problems with `spec` (missing paths, backend-specific inputs absent).
std::vector<std::string> check_run_spec(const RunSpec& spec);

struct LoadedBackend {
  std::unique_ptr<Predictor> predictor;
  std::shared_ptr<const PhraseTable> table;
  ContextDoc context;
};

LoadedBackend load_backend(const RunSpec& spec);

struct RunOutput {
  ReplayResult result;
  std::string event_log;
  std::string report;
};

/// Loads everything, replays, and writes the requested outputs atomically.
RunOutput run(const RunSpec& spec);

/// Trains an n-gram model from a corpus file and writes it atomically.
NgramModel train_model(const std::filesystem::path& corpus, std::size_t order, double alpha,
                       const std::filesystem::path& out);

struct ValidateInputs {
  std::vector<std::filesystem::path> transcripts;
  std::vector<std::filesystem::path> fixtures;
  std::vector<std::filesystem::path> phrase_tables;
  std::vector<std::filesystem::path> configs;
};

/// Every violation, prefixed with its file; empty when everything is valid.
std::vector<std::string> validate_inputs(const ValidateInputs& inputs);

// Interactive loop: each input line holds whitespace-separated source
// tokens, fed one at a time. After each token prints the tree, the
// template and any events. A blank line finalizes the utterance; a blank
// line with nothing pending (or end of input) exits.
void run_demo(std::istream& in, std::ostream& out, const EngineConfig& config, const LoadedBackend& backend);

}  // namespace si
