#include "specinterp/confirmation.hpp"

#include <algorithm>
#include <stdexcept>

namespace si {

TargetTemplate TargetTemplate::all_hole() { return with_hole({}, {}); }

TargetTemplate TargetTemplate::fully_fixed(const Tokens& tokens) {
  TargetTemplate t;
  for (const auto& tok : tokens) t.slots.push_back({Slot::Kind::Fixed, tok, 0});
  return t;
}

TargetTemplate TargetTemplate::with_hole(const Tokens& prefix, const Tokens& suffix) {
  TargetTemplate t = fully_fixed(prefix);
  t.slots.push_back({Slot::Kind::Hole, {}, 0});
  for (const auto& tok : suffix) t.slots.push_back({Slot::Kind::Fixed, tok, 0});
  return t;
}

std::optional<std::size_t> TargetTemplate::hole_index() const {
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i].fixed()) return i;
  }
  return std::nullopt;
}

Tokens TargetTemplate::prefix() const {
  Tokens out;
  for (const auto& s : slots) {
    if (!s.fixed()) break;
    out.push_back(s.token);
  }
  return out;
}

Tokens TargetTemplate::suffix() const {
  const auto hole = hole_index();
  if (!hole) return {};
  Tokens out;
  for (std::size_t i = *hole + 1; i < slots.size(); ++i) out.push_back(slots[i].token);
  return out;
}

Tokens TargetTemplate::slot_tokens() const {
  Tokens out;
  out.reserve(slots.size());
  for (const auto& s : slots) out.push_back(s.fixed() ? s.token : Token(kHoleMarker));
  return out;
}

std::string TargetTemplate::render() const {
  std::string out;
  for (const auto& tok : slot_tokens()) {
    if (!out.empty()) out += ' ';
    out += tok;
  }
  return out;
}

TargetTemplate consensus(std::span<const Hypothesis> hyps, double tau) {
  std::vector<const Hypothesis*> ranked;
  for (const auto& h : hyps) ranked.push_back(&h);
  std::stable_sort(ranked.begin(), ranked.end(), [](const Hypothesis* a, const Hypothesis* b) {
    if (a->mass != b->mass) return a->mass > b->mass;
    return a->translation < b->translation;
  });

  std::size_t cover = 0;
  double cum = 0.0;
  while (cover < ranked.size() && cum < tau - 1e-9) cum += ranked[cover++]->mass;
  if (cum < tau - 1e-9 || cover == 0) return TargetTemplate::all_hole();

  const Tokens& first = ranked[0]->translation;
  std::size_t min_len = first.size();
  bool any_open = false;
  for (std::size_t i = 0; i < cover; ++i) {
    min_len = std::min(min_len, ranked[i]->translation.size());
    any_open = any_open || !ranked[i]->complete;
  }

  std::size_t lcp = 0;
  while (lcp < min_len) {
    bool same = true;
    for (std::size_t i = 1; i < cover && same; ++i) same = ranked[i]->translation[lcp] == first[lcp];
    if (!same) break;
    ++lcp;
  }

  bool identical = lcp == min_len;
  for (std::size_t i = 0; i < cover && identical; ++i) identical = ranked[i]->translation.size() == min_len;
  if (identical && !any_open) return TargetTemplate::fully_fixed(first);

  std::size_t lcs = 0;
  if (!any_open) {
    while (lcs < min_len - lcp) {
      const Token& tok = first[first.size() - 1 - lcs];
      bool same = true;
      for (std::size_t i = 1; i < cover && same; ++i) {
        const Tokens& t = ranked[i]->translation;
        same = t[t.size() - 1 - lcs] == tok;
      }
      if (!same) break;
      ++lcs;
    }
  }
  return TargetTemplate::with_hole(Tokens(first.begin(), first.begin() + static_cast<std::ptrdiff_t>(lcp)),
                                   Tokens(first.end() - static_cast<std::ptrdiff_t>(lcs), first.end()));
}

namespace {

RevisionConflict conflict_at(const TargetTemplate& committed, std::size_t slot, Token contradicting) {
  Token committed_tok = slot < committed.slots.size() ? committed.slots[slot].token : Token{};
  return {slot, std::move(committed_tok), std::move(contradicting)};
}

Token at_or_empty(const Tokens& t, std::size_t i) { return i < t.size() ? t[i] : Token{}; }

}  // namespace

std::variant<TargetTemplate, RevisionConflict> refine(const TargetTemplate& committed, const TargetTemplate& fresh) {
  const auto c_hole = committed.hole_index();
  const auto f_hole = fresh.hole_index();
  const Tokens cp = committed.prefix();
  const Tokens cs = committed.suffix();
  const Tokens fp = fresh.prefix();
  const Tokens fs = fresh.suffix();

  if (!c_hole) {
    // Nothing left to fill; fresh must agree wherever it is Fixed.
    if (!f_hole) {
      const std::size_t n = std::max(cp.size(), fp.size());
      for (std::size_t i = 0; i < n; ++i) {
        if (at_or_empty(cp, i) != at_or_empty(fp, i)) return conflict_at(committed, i, at_or_empty(fp, i));
      }
      return committed;
    }
    for (std::size_t i = 0; i < fp.size(); ++i) {
      if (i >= cp.size() || cp[i] != fp[i]) return conflict_at(committed, i, fp[i]);
    }
    if (fp.size() + fs.size() > cp.size()) {
      return conflict_at(committed, cp.empty() ? 0 : cp.size() - 1, fs.front());
    }
    for (std::size_t j = 0; j < fs.size(); ++j) {
      const std::size_t pos = cp.size() - fs.size() + j;
      if (cp[pos] != fs[j]) return conflict_at(committed, pos, fs[j]);
    }
    return committed;
  }

  const std::size_t suffix_start = *c_hole + 1;
  if (!f_hole) {
    for (std::size_t i = 0; i < cp.size(); ++i) {
      if (i >= fp.size() || fp[i] != cp[i]) return conflict_at(committed, i, at_or_empty(fp, i));
    }
    if (fp.size() < cp.size() + cs.size()) {
      // Too short to hold both committed ends; report the first suffix slot it misses.
      return conflict_at(committed, suffix_start, Token{});
    }
    for (std::size_t j = 0; j < cs.size(); ++j) {
      const Token& got = fp[fp.size() - cs.size() + j];
      if (got != cs[j]) return conflict_at(committed, suffix_start + j, got);
    }
    TargetTemplate out = TargetTemplate::fully_fixed(fp);
    out.emit_ptr = committed.emit_ptr;
    return out;
  }

  for (std::size_t i = 0; i < std::min(cp.size(), fp.size()); ++i) {
    if (cp[i] != fp[i]) return conflict_at(committed, i, fp[i]);
  }
  const std::size_t common_suffix = std::min(cs.size(), fs.size());
  for (std::size_t j = 0; j < common_suffix; ++j) {
    const Token& c = cs[cs.size() - 1 - j];
    const Token& f = fs[fs.size() - 1 - j];
    if (c != f) return conflict_at(committed, suffix_start + cs.size() - 1 - j, f);
  }
  TargetTemplate out =
      TargetTemplate::with_hole(fp.size() > cp.size() ? fp : cp, fs.size() > cs.size() ? fs : cs);
  out.slots[*out.hole_index()].hole_id = committed.slots[*c_hole].hole_id;
  out.emit_ptr = committed.emit_ptr;
  return out;
}

Tokens emittable(TargetTemplate& tmpl, std::span<const IdiomSpan> idioms) {
  std::size_t end = tmpl.hole_index().value_or(tmpl.slots.size());
  for (const auto& span : idioms) {
    if (span.start < end && end < span.end) end = span.start;
  }
  if (end <= tmpl.emit_ptr) return {};
  Tokens out;
  for (std::size_t i = tmpl.emit_ptr; i < end; ++i) out.push_back(tmpl.slots[i].token);
  tmpl.emit_ptr = end;
  return out;
}

std::vector<IdiomSpan> template_idioms(const TargetTemplate& tmpl, const PhraseTable* table) {
  if (table == nullptr) return {};
  return table->idiom_spans(tmpl.slot_tokens());
}

}  // namespace si
