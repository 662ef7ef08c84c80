#include "specinterp/engine.hpp"

#include <algorithm>
#include <array>
#include <string>
#include <utility>

#include "specinterp/error.hpp"

namespace si {

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 8> kKindNames{{
    {EventKind::Emit, "emit"},
    {EventKind::Diverge, "diverge"},
    {EventKind::Repredict, "repredict"},
    {EventKind::Catchup, "catchup"},
    {EventKind::ContextShift, "context_shift"},
    {EventKind::Conflict, "conflict"},
    {EventKind::Hit, "hit"},
    {EventKind::End, "end"},
}};

OutputEvent make_event(EventKind kind, std::int64_t t_ms) {
  OutputEvent ev;
  ev.kind = kind;
  ev.t_ms = t_ms;
  return ev;
}

void append(std::vector<OutputEvent>& out, std::vector<OutputEvent> more) {
  out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
}

// Best surviving hypothesis that covers exactly the observed source.
std::optional<Tokens> surviving_translation(const TreeNode& node, bool is_root, double& best_mass) {
  std::optional<Tokens> best;
  if (node.leaf()) {
    if (!is_root && node.named() && node.complete && node.fully_consumed() && node.path_p > best_mass) {
      best_mass = node.path_p;
      best = node.translation;
    }
    return best;
  }
  for (const auto& c : node.children) {
    if (!c.named() || !c.fully_consumed()) continue;
    if (auto t = surviving_translation(c, false, best_mass)) best = std::move(t);
  }
  return best;
}

std::size_t common_prefix(const Tokens& a, const Tokens& b) {
  std::size_t n = 0;
  while (n < a.size() && n < b.size() && a[n] == b[n]) ++n;
  return n;
}

}  // namespace

std::string_view to_string(EventKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<EventKind> parse_event_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

Session::Session(const EngineConfig& config, ContextDoc context, const Predictor& predictor,
                 const PhraseTable* table, std::size_t first_index)
    : config_(config), context_(std::move(context)), predictor_(&predictor), table_(table), next_index_(first_index) {
  const auto problems = validate_config(config_);
  if (!problems.empty()) {
    std::string msg = "invalid config:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw Error(ErrorKind::InvalidConfig, msg);
  }
  if (!context_.body.empty()) context_perplexity_ = predictor_->perplexity(context_.body);
  tree_ = build_tree(observed_, predict());
}

std::optional<PredictionSet> Session::predict() const {
  auto ps = predictor_->predict(context_, observed_, config_.k, aux_);
  // A result computed for another prefix is stale.
  if (ps && ps->prefix_len != observed_.size()) return std::nullopt;
  return ps;
}

bool Session::push(const TokenEvent& ev, std::vector<OutputEvent>& out) {
  if (finished_ || final_seen_) {
    throw Error(ErrorKind::OutOfOrderToken, "event " + std::to_string(ev.index) + " after the final marker");
  }
  if (ev.index != next_index_) {
    throw Error(ErrorKind::OutOfOrderToken,
                "expected event " + std::to_string(next_index_) + ", got " + std::to_string(ev.index));
  }
  ++next_index_;
  ++heard_;
  final_seen_ = ev.is_final;
  buffer_.push_back(ev);
  if (buffer_.size() > config_.buffer_limit) {
    append(out, catchup());
    return true;
  }
  return false;
}

std::vector<OutputEvent> Session::deliver(const TokenEvent& ev) {
  std::vector<OutputEvent> out;
  push(ev, out);
  return out;
}

std::vector<OutputEvent> Session::feed(const TokenEvent& ev) {
  std::vector<OutputEvent> out;
  if (!push(ev, out)) append(out, process_one());
  return out;
}

std::vector<OutputEvent> Session::process_one() {
  std::vector<OutputEvent> out;
  if (buffer_.empty()) return out;
  const TokenEvent ev = buffer_.front();
  buffer_.pop_front();
  last_t_ms_ = ev.t_ms;
  if (ev.is_final) final_drained_ = true;

  const std::size_t before = observed_.size();
  const MatchOutcome outcome = advance(tree_, before, ev.surface);
  observed_.push_back(ev.surface);

  switch (outcome.kind) {
    case MatchKind::Matched: {
      ++counters_.hits;
      out.push_back(make_event(EventKind::Hit, ev.t_ms));
      const auto leaves = expandable_leaves(tree_, config_.d);
      if (!leaves.empty()) {
        // Every fully consumed leaf spells out the observed prefix, so one
        // prediction serves all of them.
        const auto ps = predict();
        for (const auto& path : leaves) expand(tree_, path, ps, config_.d);
      }
      prune(tree_, config_.epsilon, config_.k);
      const auto hyps = leaf_hypotheses(tree_);
      commit(consensus(hyps, config_.tau), ev.t_ms, out);
      break;
    }
    case MatchKind::Diverged:
      ++counters_.divergences;
      out.push_back(make_event(EventKind::Diverge, ev.t_ms));
      out.push_back(make_event(EventKind::Repredict, ev.t_ms));
      rebuild(ev.t_ms, out);
      break;
    case MatchKind::Idle:
      rebuild(ev.t_ms, out);
      break;
  }
  drift_after_growth(before, ev.t_ms, out);
  return out;
}

std::vector<OutputEvent> Session::catchup() {
  std::vector<OutputEvent> out;
  if (buffer_.empty()) return out;
  const std::size_t before = observed_.size();
  OutputEvent marker = make_event(EventKind::Catchup, buffer_.back().t_ms);
  for (const auto& ev : buffer_) {
    marker.toks.push_back(ev.surface);
    observed_.push_back(ev.surface);
    if (ev.is_final) final_drained_ = true;
  }
  last_t_ms_ = marker.t_ms;
  buffer_.clear();
  ++counters_.catchups;
  out.push_back(marker);

  // Direct translation of everything heard so far; while the utterance is
  // still open only the part the phrase table cannot revise is fixed.
  TargetTemplate fresh;
  if (table_ == nullptr) {
    fresh = final_drained_ ? TargetTemplate::fully_fixed(observed_) : TargetTemplate::with_hole(observed_, {});
  } else if (final_drained_) {
    fresh = TargetTemplate::fully_fixed(table_->translate(observed_));
  } else {
    fresh = TargetTemplate::with_hole(table_->translate_stable(observed_).target, {});
  }
  commit(std::move(fresh), marker.t_ms, out);

  tree_ = build_tree(observed_, predict());
  commit(consensus(leaf_hypotheses(tree_), config_.tau), marker.t_ms, out);
  drift_after_growth(before, marker.t_ms, out);
  return out;
}

std::optional<OutputEvent> Session::context_shift_check(std::span<const Token> window, std::int64_t t_ms) {
  if (!context_perplexity_ || *context_perplexity_ <= 0.0 || window.empty()) return std::nullopt;
  const auto ppl = predictor_->perplexity(window);
  if (!ppl || *ppl / *context_perplexity_ <= config_.drift_ratio) return std::nullopt;
  ++counters_.drift_events;
  aux_.assign(window.begin(), window.end());
  return make_event(EventKind::ContextShift, t_ms);
}

std::vector<OutputEvent> Session::finalize() {
  if (finished_) throw Error(ErrorKind::OutOfOrderToken, "session already finalized");
  if (!final_seen_) throw Error(ErrorKind::MissingFinalMarker, "finalize before the final event was delivered");
  std::vector<OutputEvent> out;
  while (!buffer_.empty()) append(out, process_one());

  std::optional<Tokens> resolved;
  if (counters_.divergences == 0) {
    double best = -1.0;
    resolved = surviving_translation(tree_.root, true, best);
  }
  if (!resolved) resolved = table_ ? table_->translate(observed_) : observed_;

  auto refined = refine(template_, TargetTemplate::fully_fixed(*resolved));
  if (auto* t = std::get_if<TargetTemplate>(&refined)) {
    template_ = std::move(*t);
  } else {
    ++counters_.conflicts;
    out.push_back(make_event(EventKind::Conflict, last_t_ms_));
    if (template_.has_hole()) {
      // Keep every committed slot; fill the hole with what the fresh
      // translation has beyond the committed ends.
      const Tokens p = template_.prefix();
      const Tokens s = template_.suffix();
      const Tokens& f = *resolved;
      const std::size_t lcp = common_prefix(p, f);
      std::size_t lcs = 0;
      while (lcs < s.size() && lcs + lcp < f.size() && s[s.size() - 1 - lcs] == f[f.size() - 1 - lcs]) ++lcs;
      Tokens filled = p;
      filled.insert(filled.end(), f.begin() + static_cast<std::ptrdiff_t>(lcp),
                    f.end() - static_cast<std::ptrdiff_t>(lcs));
      filled.insert(filled.end(), s.begin(), s.end());
      const std::size_t emitted = template_.emit_ptr;
      template_ = TargetTemplate::fully_fixed(filled);
      template_.emit_ptr = emitted;
    }
  }
  emit_ready(last_t_ms_, out);

  OutputEvent end = make_event(EventKind::End, last_t_ms_);
  end.src = observed_.size();
  out.push_back(std::move(end));
  finished_ = true;
  return out;
}

void Session::mark_final() {
  if (heard_ == 0) throw Error(ErrorKind::EmptyEmission, "no source token delivered");
  final_seen_ = true;
  if (buffer_.empty()) final_drained_ = true;
}

void Session::rebuild(std::int64_t t_ms, std::vector<OutputEvent>& out) {
  tree_ = build_tree(observed_, predict());
  commit(consensus(leaf_hypotheses(tree_), config_.tau), t_ms, out);
}

void Session::commit(TargetTemplate fresh, std::int64_t t_ms, std::vector<OutputEvent>& out) {
  auto refined = refine(template_, fresh);
  if (auto* t = std::get_if<TargetTemplate>(&refined)) {
    template_ = std::move(*t);
  } else {
    ++counters_.conflicts;
    out.push_back(make_event(EventKind::Conflict, t_ms));
  }
  emit_ready(t_ms, out);
}

void Session::emit_ready(std::int64_t t_ms, std::vector<OutputEvent>& out) {
  const auto idioms = template_idioms(template_, table_);
  Tokens ready = emittable(template_, idioms);
  if (ready.empty()) return;
  for (const auto& tok : ready) {
    emitted_.push_back(tok);
    emission_src_.push_back(heard_);
  }
  OutputEvent ev = make_event(EventKind::Emit, t_ms);
  ev.toks = std::move(ready);
  ev.src = heard_;
  out.push_back(std::move(ev));
}

void Session::drift_after_growth(std::size_t before, std::int64_t t_ms, std::vector<OutputEvent>& out) {
  const std::size_t w = config_.drift_window;
  if (observed_.size() / w == before / w) return;
  const std::span<const Token> all(observed_);
  if (auto ev = context_shift_check(all.subspan(all.size() - w), t_ms)) out.push_back(std::move(*ev));
}

RunRecord Session::record() const {
  RunRecord r;
  r.emitted = emitted_;
  r.emission_src = emission_src_;
  r.source_len = heard_;
  r.hits = counters_.hits;
  r.divergences = counters_.divergences;
  r.conflicts = counters_.conflicts;
  r.catchups = counters_.catchups;
  r.context_shifts = counters_.drift_events;
  return r;
}

}  // namespace si
