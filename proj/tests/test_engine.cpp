#include <doctest.h>

#include <functional>
#include <memory>
#include <random>

#include "specinterp/engine.hpp"
#include "specinterp/error.hpp"
#include "specinterp/harness.hpp"

using namespace si;

namespace {

const std::string kFixtures = SPECINTERP_FIXTURES;

struct Golden {
  Transcript transcript = parse_transcript(read_file(kFixtures + "/golden/transcript.jsonl"));
  PhraseTable table = PhraseTable::parse(read_file(kFixtures + "/golden/phrases.tsv"));
  ScriptedPredictor predictor{ScriptedFixture::parse(read_file(kFixtures + "/golden/predictions.json"))};
  ContextDoc context = *predictor.fixture().find_context("golden");
};

std::vector<OutputEvent> run_all(Session& s, const Transcript& t) {
  std::vector<OutputEvent> all;
  for (const auto& ev : t.events) {
    auto out = s.feed(ev);
    all.insert(all.end(), out.begin(), out.end());
  }
  auto out = s.finalize();
  all.insert(all.end(), out.begin(), out.end());
  return all;
}

// Deterministic pseudo-random predictions keyed by the prefix. Translations
// come from the phrase table so they agree with direct translation.
class RandomPredictor final : public Predictor {
 public:
  RandomPredictor(std::uint32_t seed, const PhraseTable& table) : seed_(seed), table_(table) {}

  std::optional<PredictionSet> predict(const ContextDoc&, std::span<const Token> prefix, std::size_t k,
                                       std::span<const Token>) const override {
    std::size_t h = seed_;
    for (const auto& t : prefix) h = h * 131 + std::hash<std::string>{}(t);
    std::mt19937 rng(static_cast<std::uint32_t>(h));
    if (rng() % 5 == 0) return std::nullopt;
    static const char* words[] = {"a", "b", "c"};
    std::vector<Prediction> items;
    double left = 1.0;
    for (std::size_t i = rng() % (k + 1); i > 0; --i) {
      Prediction p;
      for (std::size_t j = 1 + rng() % 3; j > 0; --j) p.continuation.push_back(words[rng() % 3]);
      bool dup = false;
      for (const auto& q : items) dup = dup || q.continuation == p.continuation;
      if (dup) continue;
      p.p = std::uniform_real_distribution<double>(0.0, left)(rng);
      if (rng() % 4 == 0) p.p = left;
      if (p.p <= 0.0) continue;
      left -= p.p;
      p.complete = rng() % 2;
      Tokens sentence(prefix.begin(), prefix.end());
      sentence.insert(sentence.end(), p.continuation.begin(), p.continuation.end());
      p.translation = p.complete ? table_.translate(sentence) : table_.translate_stable(sentence).target;
      items.push_back(std::move(p));
    }
    return make_prediction_set(std::move(items), k, prefix.size());
  }
  std::string_view name() const override { return "random"; }

 private:
  std::uint32_t seed_;
  const PhraseTable& table_;
};

Transcript random_transcript(std::mt19937& rng) {
  static const char* words[] = {"a", "b", "c"};
  Transcript t;
  const std::size_t n = 1 + rng() % 10;
  for (std::size_t i = 0; i < n; ++i) {
    t.events.push_back({i, words[rng() % 3], static_cast<std::int64_t>(i * 100), i + 1 == n});
  }
  return t;
}

PhraseTable letter_table() {
  return PhraseTable({
      {{"a"}, {"A"}, false},
      {{"b"}, {"B"}, false},
      {{"c"}, {"C"}, false},
      {{"a", "b"}, {"AB"}, false},
      {{"b", "c", "a"}, {"X", "Y"}, true},
  });
}

}  // namespace

TEST_CASE("golden run") {
  Golden p;
  Session s(EngineConfig{}, p.context, p.predictor, &p.table);
  std::vector<OutputEvent> all;
  std::string template_at_5;
  for (const auto& ev : p.transcript.events) {
    auto out = s.feed(ev);
    all.insert(all.end(), out.begin(), out.end());
    if (ev.index == 4) template_at_5 = s.target().render();
  }
  auto out = s.finalize();
  all.insert(all.end(), out.begin(), out.end());

  CHECK(template_at_5 == "Yesterday , I [*] with my friend");
  std::vector<EventKind> kinds;
  for (const auto& e : all) kinds.push_back(e.kind);
  CHECK(kinds == std::vector<EventKind>{EventKind::Emit, EventKind::Diverge, EventKind::Repredict, EventKind::Emit,
                                        EventKind::Hit, EventKind::Hit, EventKind::End});
  CHECK(all[0].src == 5);
  CHECK(all[3].src == 6);
  CHECK(all.back().src == 8);
  CHECK(all[1].t_ms == 1200);
  CHECK(s.emitted() == *p.transcript.reference);
  CHECK(s.counters().divergences == 1);
  CHECK(s.counters().conflicts == 0);
  CHECK(s.counters().hits == 2);
  CHECK(s.finished());
}

TEST_CASE("no prediction leaves everything to finalize") {
  Golden p;
  ScriptedPredictor empty{ScriptedFixture{}};
  Session s(EngineConfig{}, p.context, empty, &p.table);
  const auto all = run_all(s, p.transcript);
  REQUIRE(all.size() == 2);
  CHECK(all[0].kind == EventKind::Emit);
  CHECK(all[0].src == 8);
  CHECK(all[1].kind == EventKind::End);
  CHECK(s.emitted() == p.table.translate(s.observed()));
}

TEST_CASE("a certain single hypothesis emits without divergence") {
  ScriptedFixture f;
  f.contexts.push_back({"c", {"x"}});
  f.entries.push_back({"c", {}, {{{"a", "b"}, 1.0, {"A", "B"}, true}}});
  ScriptedPredictor pred(f);
  Session s(EngineConfig{}, f.contexts[0], pred, nullptr);
  auto first = s.feed({0, "a", 0, false});
  REQUIRE_FALSE(first.empty());
  CHECK(first[0].kind == EventKind::Hit);
  CHECK(first[1].kind == EventKind::Emit);
  CHECK(first[1].toks == Tokens{"A", "B"});
  CHECK(first[1].src == 1);
  s.feed({1, "b", 10, true});
  s.finalize();
  CHECK(s.emitted() == Tokens{"A", "B"});
  CHECK(s.counters().divergences == 0);
}

TEST_CASE("emission is append-only on random scenarios") {
  const PhraseTable table = letter_table();
  std::mt19937 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    RandomPredictor pred(static_cast<std::uint32_t>(rng()), table);
    const Transcript t = random_transcript(rng);
    EngineConfig cfg;
    cfg.k = 1 + rng() % 4;
    cfg.d = 1 + rng() % 3;
    cfg.tau = std::uniform_real_distribution<double>(0.3, 1.0)(rng);
    cfg.epsilon = 0.01;
    Session s(cfg, ContextDoc{}, pred, &table);
    Tokens seen;
    for (const auto& ev : t.events) {
      for (const auto& e : s.feed(ev)) {
        if (e.kind == EventKind::Emit) seen.insert(seen.end(), e.toks.begin(), e.toks.end());
      }
      REQUIRE(s.emitted() == seen);
      const auto slots = s.target().slot_tokens();
      REQUIRE(s.target().emit_ptr == seen.size());
      REQUIRE(std::equal(seen.begin(), seen.end(), slots.begin()));
    }
    for (const auto& e : s.finalize()) {
      if (e.kind == EventKind::Emit) seen.insert(seen.end(), e.toks.begin(), e.toks.end());
    }
    REQUIRE(s.emitted() == seen);
    if (s.counters().divergences > 0 && s.counters().conflicts == 0) {
      CHECK(seen == table.translate(s.observed()));
    }
  }
}

TEST_CASE("catch-up translates the drained span") {
  PhraseTable table({{{"a"}, {"A"}, false}, {{"b"}, {"B"}, false}, {{"c"}, {"C"}, false}});
  ScriptedPredictor none{ScriptedFixture{}};
  EngineConfig cfg;
  cfg.buffer_limit = 2;
  Session s(cfg, ContextDoc{}, none, &table);
  CHECK(s.deliver({0, "a", 0, false}).empty());
  CHECK(s.deliver({1, "b", 10, false}).empty());
  const auto out = s.deliver({2, "c", 20, false});
  REQUIRE(out.size() == 2);
  CHECK(out[0].kind == EventKind::Catchup);
  CHECK(out[0].toks == Tokens{"a", "b", "c"});
  CHECK(out[1].kind == EventKind::Emit);
  CHECK(out[1].toks == Tokens{"A", "B", "C"});
  CHECK(out[1].src == 3);
  CHECK(s.buffered() == 0);
  CHECK(s.counters().catchups == 1);
  s.feed({3, "a", 30, true});
  s.finalize();
  CHECK(s.emitted() == Tokens{"A", "B", "C", "A"});
}

TEST_CASE("context shift is detected from perplexity") {
  const std::vector<Tokens> corpus{{"a", "b", "c"}, {"a", "b", "d"}};
  auto model = std::make_shared<const NgramModel>(NgramModel::train(corpus, 2, 0.1));
  NgramPredictor pred(model, nullptr, 3);
  EngineConfig cfg;
  cfg.drift_window = 2;
  const ContextDoc ctx{"toy", {"a", "b", "c", "a", "b", "d"}};

  Session in_domain(cfg, ctx, pred, nullptr);
  in_domain.feed({0, "a", 0, false});
  in_domain.feed({1, "b", 10, true});
  CHECK(in_domain.counters().drift_events == 0);

  Session shifted(cfg, ctx, pred, nullptr);
  shifted.feed({0, "zz", 0, false});
  const auto out = shifted.feed({1, "yy", 10, true});
  REQUIRE_FALSE(out.empty());
  CHECK(out.back().kind == EventKind::ContextShift);
  CHECK(shifted.counters().drift_events == 1);

  Golden p;
  Session scripted(cfg, p.context, p.predictor, &p.table);
  CHECK_FALSE(scripted.context_shift_check(Tokens{"zz", "yy"}, 0).has_value());
}

TEST_CASE("session errors") {
  Golden p;
  Session s(EngineConfig{}, p.context, p.predictor, &p.table);
  CHECK_THROWS_AS(s.feed({1, "x", 0, false}), Error);
  try {
    s.feed({3, "x", 0, false});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutOfOrderToken);
  }
  s.feed({0, "私は", 0, false});
  try {
    s.finalize();
    FAIL("finalize without final marker");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingFinalMarker);
  }
  s.feed({1, "昨日", 0, true});
  CHECK_THROWS_AS(s.feed({2, "、", 0, false}), Error);
  s.finalize();
  CHECK_THROWS_AS(s.finalize(), Error);

  EngineConfig bad;
  bad.k = 0;
  try {
    Session b(bad, p.context, p.predictor, &p.table);
    FAIL("invalid config accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidConfig);
  }

  Session empty(EngineConfig{}, p.context, p.predictor, &p.table);
  try {
    empty.mark_final();
    FAIL("mark_final with nothing heard");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyEmission);
  }
}

TEST_CASE("event kind names round trip") {
  for (auto k : {EventKind::Emit, EventKind::Diverge, EventKind::Repredict, EventKind::Catchup,
                 EventKind::ContextShift, EventKind::Conflict, EventKind::Hit, EventKind::End}) {
    CHECK(parse_event_kind(to_string(k)) == k);
  }
  CHECK_FALSE(parse_event_kind("bogus").has_value());
}
