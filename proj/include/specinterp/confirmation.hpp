#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "specinterp/phrase_table.hpp"
#include "specinterp/prediction.hpp"
#include "specinterp/stream_model.hpp"

namespace si {

/// Rendering of a Hole slot.
inline constexpr const char* kHoleMarker = "[*]";

struct Slot {
  enum class Kind { Fixed, Hole };
  Kind kind = Kind::Fixed;
  Token token;              // Fixed only
  std::size_t hole_id = 0;  // Hole only

  bool fixed() const { return kind == Kind::Fixed; }
  bool operator==(const Slot&) const = default;
};

// Committed target output: Fixed tokens with at most one Hole. Slots before
// emit_ptr have been emitted and are never changed again.
struct TargetTemplate {
  std::vector<Slot> slots;
  std::size_t emit_ptr = 0;

  static TargetTemplate all_hole();
  static TargetTemplate fully_fixed(const Tokens& tokens);
  static TargetTemplate with_hole(const Tokens& prefix, const Tokens& suffix);

  std::optional<std::size_t> hole_index() const;
  bool has_hole() const { return hole_index().has_value(); }
  /// Fixed tokens before the hole (all tokens when there is none).
  Tokens prefix() const;
  /// Fixed tokens after the hole (empty when there is none).
  Tokens suffix() const;
  /// Slot tokens with the hole rendered as kHoleMarker, index-aligned with slots.
  Tokens slot_tokens() const;
  /// Space-joined slot_tokens(), e.g. "Yesterday , I [*] with my friend".
  std::string render() const;

  bool operator==(const TargetTemplate&) const = default;
};

struct RevisionConflict {
  std::size_t slot = 0;
  Token committed;
  Token contradicting;

  bool operator==(const RevisionConflict&) const = default;
};

// Mass-weighted consensus. Takes the smallest mass-ranked prefix of `hyps`
// whose cumulative mass reaches tau (1e-9 slack) and returns its longest
// common prefix + Hole + longest common suffix, the suffix shortened so the
// two never overlap in any member. Identical complete members give a fully
// Fixed template; a cover containing an open hypothesis commits no suffix.
// Below tau the result is all Hole.
TargetTemplate consensus(std::span<const Hypothesis> hyps, double tau);

// Fills the committed template's hole from `fresh`, aligned on the
// committed prefix and suffix. Committed Fixed slots never change: any
// disagreement returns the first contradicted slot instead.
std::variant<TargetTemplate, RevisionConflict> refine(const TargetTemplate& committed, const TargetTemplate& fresh);

// Emits the Fixed run from emit_ptr up to the first hole, cut back so it
// never ends strictly inside an idiom span. Spans index slot_tokens().
Tokens emittable(TargetTemplate& tmpl, std::span<const IdiomSpan> idioms);

/// Idiom spans of `tmpl` under `table` (convenience for emittable()).
std::vector<IdiomSpan> template_idioms(const TargetTemplate& tmpl, const PhraseTable* table);

}  // namespace si
