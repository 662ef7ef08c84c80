#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "specinterp/error.hpp"
#include "specinterp/harness.hpp"

using namespace si;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = SPECINTERP_FIXTURES;

RunSpec golden_spec() {
  RunSpec spec;
  spec.transcript = kFixtures + "/golden/transcript.jsonl";
  spec.config = kFixtures + "/golden/config.json";
  spec.fixtures = kFixtures + "/golden/predictions.json";
  spec.phrase_table = kFixtures + "/golden/phrases.tsv";
  return spec;
}

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("specinterp_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("lag profile") {
  const auto p = LagProfile::parse("1,1,4");
  CHECK(p.at(0) == 1);
  CHECK(p.at(2) == 4);
  CHECK(p.at(50) == 4);
  CHECK(LagProfile::parse("3").at(7) == 3);
  CHECK(LagProfile{}.at(0) == 1);
  for (const char* bad : {"", "0", "x", "1,,2", "2,-1"}) {
    try {
      LagProfile::parse(bad);
      FAIL("accepted " << bad);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidConfig);
    }
  }
}

TEST_CASE("golden run and event log round trip") {
  const auto out = run(golden_spec());
  const auto& rep = out.result.report;
  CHECK(rep.divergences == 1);
  CHECK(rep.conflicts == 0);
  CHECK(rep.accuracy == 1.0);
  CHECK(rep.hit_rate == doctest::Approx(0.25));
  REQUIRE(rep.al.has_value());
  CHECK(*rep.al < *rep.al_wait_until_end);

  const auto parsed = parse_event_log(out.event_log);
  CHECK(parsed == out.result.events);
  CHECK(serialize_event_log(parsed) == out.event_log);
  const auto rec = record_from_log(parsed, out.result.record.reference);
  CHECK(compute_report(rec) == rep);

  // Byte-identical on a second run.
  CHECK(run(golden_spec()).event_log == out.event_log);
}

TEST_CASE("lagged run triggers one catch-up") {
  auto spec = golden_spec();
  spec.config = kFixtures + "/catchup/config.json";
  spec.lag = LagProfile::parse("3");
  const auto out = run(spec);
  CHECK(out.result.report.catchups == 1);
  CHECK(out.result.report.accuracy == 1.0);
  std::size_t n = 0;
  for (const auto& e : out.result.events) n += e.event.kind == EventKind::Catchup;
  CHECK(n == 1);
}

TEST_CASE("malformed event logs report the line") {
  try {
    parse_event_log("{\"kind\":\"hit\",\"utt\":0,\"t_ms\":0}\nnot json\n");
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MalformedRecord);
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_event_log("{\"kind\":\"nope\",\"utt\":0,\"t_ms\":0}\n"), Error);
}

TEST_CASE("outputs are written atomically") {
  const auto dir = temp_dir("atomic");
  const auto path = dir / "out.json";
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  CHECK(read_file(path) == "second");
  CHECK_FALSE(fs::exists(dir / "out.json.tmp"));
  try {
    read_file(dir / "missing");
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }

  auto spec = golden_spec();
  spec.out_events = dir / "events.jsonl";
  spec.out_report = dir / "report.json";
  const auto out = run(spec);
  CHECK(read_file(*spec.out_events) == out.event_log);
  CHECK(read_file(*spec.out_report) == out.report);
}

TEST_CASE("missing inputs are reported before running") {
  auto spec = golden_spec();
  spec.fixtures = kFixtures + "/golden/none.json";
  CHECK_FALSE(check_run_spec(spec).empty());
  CHECK_THROWS_AS(run(spec), Error);
  RunSpec ngram;
  ngram.transcript = golden_spec().transcript;
  ngram.backend = BackendKind::Ngram;
  CHECK_FALSE(check_run_spec(ngram).empty());
  CHECK(parse_backend_kind("ngram") == BackendKind::Ngram);
  CHECK_FALSE(parse_backend_kind("gpt").has_value());
}

TEST_CASE("training is deterministic") {
  const auto dir = temp_dir("train");
  const auto a = train_model(kFixtures + "/toy/corpus.txt", 3, 0.1, dir / "a.model");
  const auto b = train_model(kFixtures + "/toy/corpus.txt", 3, 0.1, dir / "b.model");
  CHECK(a == b);
  CHECK(read_file(dir / "a.model") == read_file(dir / "b.model"));
  CHECK(NgramModel::deserialize(read_file(dir / "a.model")) == a);
}

TEST_CASE("validate") {
  ValidateInputs ok;
  ok.transcripts = {kFixtures + "/golden/transcript.jsonl"};
  ok.fixtures = {kFixtures + "/golden/predictions.json"};
  ok.phrase_tables = {kFixtures + "/golden/phrases.tsv"};
  ok.configs = {kFixtures + "/golden/config.json", kFixtures + "/catchup/config.json"};
  CHECK(validate_inputs(ok).empty());

  const auto dir = temp_dir("validate");
  write_file_atomic(dir / "bad.tsv", "a\n\tb\n");
  write_file_atomic(dir / "bad.json", "{\"k\":0}");
  write_file_atomic(dir / "bad.jsonl", "{\"src\":\"ja\",\"tgt\":\"en\"}\n{\"i\":1,\"tok\":\"x\",\"t_ms\":0,\"final\":true}\n");
  ValidateInputs bad;
  bad.phrase_tables = {dir / "bad.tsv"};
  bad.configs = {dir / "bad.json"};
  bad.transcripts = {dir / "bad.jsonl", dir / "absent.jsonl"};
  const auto problems = validate_inputs(bad);
  CHECK(problems.size() >= 5);
}

TEST_CASE("multi-utterance replay offsets source counts") {
  Transcript t = parse_transcript(read_file(kFixtures + "/golden/transcript.jsonl"));
  const std::size_t n = t.events.size();
  for (std::size_t i = 0; i < n; ++i) {
    TokenEvent e = t.events[i];
    e.index += n;
    e.t_ms += 5000;
    t.events.push_back(e);
  }
  const Tokens once = *t.reference;
  t.reference->insert(t.reference->end(), once.begin(), once.end());
  const auto spec = golden_spec();
  const auto backend = load_backend(spec);
  const auto r = replay(t, parse_config(read_file(*spec.config)), *backend.predictor, backend.table.get(),
                        backend.context);
  CHECK(r.record.source_len == 2 * n);
  CHECK(r.report.divergences == 2);
  REQUIRE(r.report.accuracy.has_value());
  CHECK(*r.report.accuracy == 1.0);
  std::size_t ends = 0;
  for (const auto& e : r.events) {
    if (e.event.kind == EventKind::End) {
      CHECK(e.event.src == n);
      CHECK(e.utterance == ends);
      ++ends;
    }
  }
  CHECK(ends == 2);
  CHECK(r.record.emission_src.back() == n + 6);
}

TEST_CASE("demo") {
  const auto spec = golden_spec();
  const auto backend = load_backend(spec);
  std::istringstream empty("");
  std::ostringstream quiet;
  run_demo(empty, quiet, EngineConfig{}, backend);
  CHECK(quiet.str().empty());

  std::istringstream in("私は 昨日 、 友達 と\n買い物 に 行った\n\n");
  std::ostringstream out;
  run_demo(in, out, EngineConfig{}, backend);
  const auto text = out.str();
  CHECK(text.find("template: Yesterday , I [*] with my friend") != std::string::npos);
  CHECK(text.find("diverge") != std::string::npos);
  CHECK(text.find("final: Yesterday , I went shopping with my friend") != std::string::npos);

  std::istringstream reserved("</s>\n");
  std::ostringstream warn;
  run_demo(reserved, warn, EngineConfig{}, backend);
  CHECK(warn.str().find("warning") != std::string::npos);
}
