#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace si {

using Token = std::string;
using Tokens = std::vector<Token>;

/// One timestamped source token from the transcription stream.
struct TokenEvent {
  std::size_t index = 0;
  Token surface;
  std::int64_t t_ms = 0;
  bool is_final = false;

  bool operator==(const TokenEvent&) const = default;
};

/// A replayable source stream. A transcript may hold several utterances;
/// each one ends with an `is_final` event and the last event is always final.
struct Transcript {
  std::string source_lang;
  std::string target_lang;
  std::vector<TokenEvent> events;
  std::optional<Tokens> reference;

  /// Events split at every final marker.
  std::vector<std::span<const TokenEvent>> utterances() const;

  bool operator==(const Transcript&) const = default;
};

struct ContextDoc {
  std::string id;
  Tokens body;
};

struct EngineConfig {
  std::size_t k = 4;
  std::size_t d = 3;
  double epsilon = 0.05;
  double tau = 0.9;
  std::size_t buffer_limit = 8;
  double drift_ratio = 2.0;
  std::size_t drift_window = 16;
};

// Parses the JSON-lines transcript format: a header object
// {"src":..,"tgt":..,"ref":[..]} followed by one {"i":..,"tok":..,"t_ms":..}
// record per line. Throws si::Error with the 1-based line number.
Transcript parse_transcript(std::string_view text);
std::string serialize_transcript(const Transcript& transcript);

/// Empty when `cfg` is valid; otherwise one message per violated invariant.
std::vector<std::string> validate_config(const EngineConfig& cfg);

// Config JSON mirrors the EngineConfig field names; missing fields keep
// their defaults. Throws InvalidConfig on unknown keys, bad types or
// violated invariants.
EngineConfig parse_config(std::string_view json_text);
std::string serialize_config(const EngineConfig& cfg);

}  // namespace si
