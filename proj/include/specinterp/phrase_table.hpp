#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "specinterp/stream_model.hpp"

namespace si {

struct PhraseEntry {
  Tokens source;
  Tokens target;
  /// Idiom flag: the target side must be emitted as a unit.
  bool atomic = false;
};

/// Target-token range [start, end).
struct IdiomSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const IdiomSpan&) const = default;
};

// Result of translating a possibly unfinished source prefix: `target` covers
// source[0, consumed); the remaining tokens could still join a longer entry.
struct StableTranslation {
  Tokens target;
  std::size_t consumed = 0;
};

// Longest-match-leftmost phrase translator. Entries are stored in a token
// trie on the source side; atomic entries' targets go into a second trie
// used for idiom detection.
class PhraseTable {
 public:
  PhraseTable() = default;
  /// Throws si::Error on an empty source key. A repeated key replaces the earlier entry.
  explicit PhraseTable(std::vector<PhraseEntry> entries);

  /// Tab-separated: source tokens, target tokens, optional literal "atomic".
  static PhraseTable parse(std::string_view text);
  /// One message per malformed line (`line N: ...`); empty when the file is valid.
  static std::vector<std::string> validate(std::string_view text);

  const std::vector<PhraseEntry>& entries() const { return entries_; }
  std::size_t max_source_len() const { return max_source_len_; }

  Tokens translate(std::span<const Token> source) const;

  // Like translate(), but stops before the first segment whose choice could
  // change if more source tokens arrived.
  StableTranslation translate_stable(std::span<const Token> source) const;

  /// Leftmost-longest, non-overlapping occurrences of atomic targets.
  std::vector<IdiomSpan> idiom_spans(std::span<const Token> target) const;

 private:
  struct Node {
    std::unordered_map<Token, std::size_t> next;
    std::optional<std::size_t> entry;
  };
  struct Match {
    std::size_t length = 0;  // 0: no entry matched
    std::optional<std::size_t> entry;
    bool could_extend = false;  // input ran out inside the trie
  };

  static std::size_t insert(std::vector<Node>& trie, std::span<const Token> key);
  static Match longest(const std::vector<Node>& trie, std::span<const Token> input);

  std::vector<PhraseEntry> entries_;
  std::vector<Node> source_trie_{Node{}};
  std::vector<Node> idiom_trie_{Node{}};
  std::size_t max_source_len_ = 0;
};

}  // namespace si
