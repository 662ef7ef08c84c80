#include "specinterp/harness.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "specinterp/error.hpp"
#include "specinterp/ngram.hpp"
#include "specinterp/prediction_tree.hpp"

namespace si {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string join(const Tokens& toks) {
  std::string s;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i) s += ' ';
    s += toks[i];
  }
  return s;
}

Tokens split_ws(std::string_view line) {
  Tokens out;
  std::istringstream in{std::string(line)};
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

// Re-throws library errors with the file they came from.
template <typename F>
auto with_file(const fs::path& path, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    std::string where = path.string();
    if (e.line() > 0) where += ":" + std::to_string(e.line());
    throw Error(e.kind(), where + ": " + e.what(), e.line());
  }
}

ContextDoc read_context_file(const fs::path& path) {
  ContextDoc doc;
  doc.id = path.stem().string();
  doc.body = split_ws(read_file(path));
  return doc;
}

}  // namespace

LagProfile::LagProfile(std::vector<std::size_t> per_tick) : per_tick_(std::move(per_tick)) {
  if (per_tick_.empty()) throw Error(ErrorKind::InvalidConfig, "lag profile is empty");
  for (auto n : per_tick_) {
    if (n == 0) throw Error(ErrorKind::InvalidConfig, "lag profile entries must be >= 1");
  }
}

LagProfile LagProfile::parse(std::string_view text) {
  std::vector<std::size_t> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view part = text.substr(start, end - start);
    while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
    while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc() || ptr != part.data() + part.size()) {
      throw Error(ErrorKind::InvalidConfig, "bad lag profile entry '" + std::string(part) + "'");
    }
    values.push_back(v);
    start = end + 1;
  }
  return LagProfile(std::move(values));
}

std::size_t LagProfile::at(std::size_t tick) const {
  return tick < per_tick_.size() ? per_tick_[tick] : per_tick_.back();
}

ReplayResult replay(const Transcript& transcript, const EngineConfig& config, const Predictor& predictor,
                    const PhraseTable* table, const ContextDoc& context, const LagProfile& lag) {
  ReplayResult r;
  std::size_t tick = 0;
  std::size_t left = lag.at(0);
  bool budget = true;
  std::size_t offset = 0;

  const auto utterances = transcript.utterances();
  for (std::size_t u = 0; u < utterances.size(); ++u) {
    const auto utt = utterances[u];
    Session session(config, context, predictor, table, utt.front().index);
    auto log = [&](std::vector<OutputEvent> evs) {
      for (auto& ev : evs) {
        if (ev.kind == EventKind::Emit) {
          for (const auto& tok : ev.toks) {
            r.record.emitted.push_back(tok);
            r.record.emission_src.push_back(offset + ev.src);
          }
        }
        r.events.push_back({u, std::move(ev)});
      }
    };
    for (const auto& ev : utt) {
      if (left == 0) {
        left = lag.at(++tick);
        budget = true;
      }
      --left;
      if (budget) {
        const std::size_t catchups = session.counters().catchups;
        log(session.feed(ev));
        if (session.counters().catchups == catchups) budget = false;
      } else {
        log(session.deliver(ev));
      }
    }
    log(session.finalize());

    const auto& c = session.counters();
    r.record.hits += c.hits;
    r.record.divergences += c.divergences;
    r.record.conflicts += c.conflicts;
    r.record.catchups += c.catchups;
    r.record.context_shifts += c.drift_events;
    offset += utt.size();
  }
  r.record.source_len = offset;
  r.record.reference = transcript.reference;
  r.report = compute_report(r.record);
  return r;
}

std::string serialize_event_log(const std::vector<LoggedEvent>& events) {
  std::string out;
  for (const auto& le : events) {
    const OutputEvent& ev = le.event;
    ojson j;
    j["kind"] = std::string(to_string(ev.kind));
    j["utt"] = le.utterance;
    j["t_ms"] = ev.t_ms;
    if (ev.kind == EventKind::Emit) j["toks"] = ev.toks;
    if (ev.kind == EventKind::Catchup) j["span"] = ev.toks;
    if (ev.kind == EventKind::Emit || ev.kind == EventKind::End) j["src"] = ev.src;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<LoggedEvent> parse_event_log(std::string_view text) {
  std::vector<LoggedEvent> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      LoggedEvent le;
      const auto kind = parse_event_kind(j.at("kind").get<std::string>());
      if (!kind) throw Error(ErrorKind::MalformedRecord, "unknown event kind", line_no);
      le.event.kind = *kind;
      le.utterance = j.at("utt").get<std::size_t>();
      le.event.t_ms = j.at("t_ms").get<std::int64_t>();
      if (*kind == EventKind::Emit) le.event.toks = j.at("toks").get<Tokens>();
      if (*kind == EventKind::Catchup) le.event.toks = j.at("span").get<Tokens>();
      if (*kind == EventKind::Emit || *kind == EventKind::End) le.event.src = j.at("src").get<std::size_t>();
      out.push_back(std::move(le));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::MalformedRecord, std::string("event log: ") + e.what(), line_no);
    }
  }
  return out;
}

RunRecord record_from_log(const std::vector<LoggedEvent>& events, const std::optional<Tokens>& reference) {
  RunRecord r;
  std::size_t offset = 0;
  for (const auto& le : events) {
    const OutputEvent& ev = le.event;
    switch (ev.kind) {
      case EventKind::Emit:
        for (const auto& tok : ev.toks) {
          r.emitted.push_back(tok);
          r.emission_src.push_back(offset + ev.src);
        }
        break;
      case EventKind::Hit: ++r.hits; break;
      case EventKind::Diverge: ++r.divergences; break;
      case EventKind::Conflict: ++r.conflicts; break;
      case EventKind::Catchup: ++r.catchups; break;
      case EventKind::ContextShift: ++r.context_shifts; break;
      case EventKind::End: offset += ev.src; break;
      case EventKind::Repredict: break;
    }
  }
  r.source_len = offset;
  r.reference = reference;
  return r;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::Io, "error reading " + path.string());
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw Error(ErrorKind::Io, "error writing " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw Error(ErrorKind::Io, "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::optional<BackendKind> parse_backend_kind(std::string_view name) {
  if (name == "scripted") return BackendKind::Scripted;
  if (name == "ngram") return BackendKind::Ngram;
  if (name == "remote") return BackendKind::Remote;
  return std::nullopt;
}

std::vector<std::string> check_run_spec(const RunSpec& spec) {
  std::vector<std::string> out;
  auto must_exist = [&](const std::optional<fs::path>& p, const char* what) {
    if (p && !fs::exists(*p)) out.push_back(std::string(what) + " not found: " + p->string());
  };
  if (!fs::exists(spec.transcript)) out.push_back("transcript not found: " + spec.transcript.string());
  must_exist(spec.config, "config");
  must_exist(spec.fixtures, "fixtures");
  must_exist(spec.model, "model");
  must_exist(spec.phrase_table, "phrase table");
  must_exist(spec.context_file, "context file");
  switch (spec.backend) {
    case BackendKind::Scripted:
      if (!spec.fixtures) out.emplace_back("scripted backend needs --fixtures");
      break;
    case BackendKind::Ngram:
      if (!spec.model) out.emplace_back("ngram backend needs --model");
      break;
    case BackendKind::Remote:
      if (spec.endpoint.empty()) out.emplace_back("remote backend needs --endpoint");
      break;
  }
  return out;
}

LoadedBackend load_backend(const RunSpec& spec) {
  LoadedBackend b;
  if (spec.phrase_table) {
    const auto& path = *spec.phrase_table;
    b.table = std::make_shared<const PhraseTable>(with_file(path, [&] { return PhraseTable::parse(read_file(path)); }));
  }
  switch (spec.backend) {
    case BackendKind::Scripted: {
      if (!spec.fixtures) throw Error(ErrorKind::InvalidConfig, "scripted backend needs fixtures");
      const auto& path = *spec.fixtures;
      auto fixture = with_file(path, [&] { return ScriptedFixture::parse(read_file(path)); });
      if (spec.context_id) {
        const ContextDoc* doc = fixture.find_context(*spec.context_id);
        if (doc == nullptr) throw Error(ErrorKind::Fixture, path.string() + ": no context '" + *spec.context_id + "'");
        b.context = *doc;
      } else if (!fixture.contexts.empty()) {
        b.context = fixture.contexts.front();
      }
      b.predictor = std::make_unique<ScriptedPredictor>(std::move(fixture));
      break;
    }
    case BackendKind::Ngram: {
      if (!spec.model) throw Error(ErrorKind::InvalidConfig, "ngram backend needs a model");
      const auto& path = *spec.model;
      auto model = std::make_shared<const NgramModel>(
          with_file(path, [&] { return NgramModel::deserialize(read_file(path)); }));
      b.predictor = std::make_unique<NgramPredictor>(std::move(model), b.table, spec.max_len);
      if (spec.context_file) b.context = read_context_file(*spec.context_file);
      break;
    }
    case BackendKind::Remote:
      b.predictor = std::make_unique<RemotePredictor>(spec.endpoint, spec.budget);
      if (spec.context_file) b.context = read_context_file(*spec.context_file);
      break;
  }
  if (spec.context_id && spec.backend != BackendKind::Scripted) b.context.id = *spec.context_id;
  return b;
}

RunOutput run(const RunSpec& spec) {
  const auto problems = check_run_spec(spec);
  if (!problems.empty()) {
    std::string msg;
    for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
    throw Error(ErrorKind::InvalidConfig, msg);
  }
  EngineConfig config;
  if (spec.config) {
    const auto& path = *spec.config;
    config = with_file(path, [&] { return parse_config(read_file(path)); });
  }
  const Transcript transcript = with_file(spec.transcript, [&] { return parse_transcript(read_file(spec.transcript)); });
  const LoadedBackend backend = load_backend(spec);

  RunOutput out;
  out.result = replay(transcript, config, *backend.predictor, backend.table.get(), backend.context, spec.lag);
  out.event_log = serialize_event_log(out.result.events);
  out.report = report_json(out.result.report);
  if (spec.out_events) write_file_atomic(*spec.out_events, out.event_log);
  if (spec.out_report) write_file_atomic(*spec.out_report, out.report);
  return out;
}

NgramModel train_model(const fs::path& corpus, std::size_t order, double alpha, const fs::path& out) {
  const auto sentences = read_corpus(read_file(corpus));
  NgramModel model = with_file(corpus, [&] { return NgramModel::train(sentences, order, alpha); });
  write_file_atomic(out, model.serialize());
  return model;
}

std::vector<std::string> validate_inputs(const ValidateInputs& inputs) {
  std::vector<std::string> out;
  auto read_or_report = [&](const fs::path& path) -> std::optional<std::string> {
    try {
      return read_file(path);
    } catch (const Error& e) {
      out.push_back(path.string() + ": " + e.what());
      return std::nullopt;
    }
  };
  for (const auto& path : inputs.transcripts) {
    const auto text = read_or_report(path);
    if (!text) continue;
    try {
      parse_transcript(*text);
    } catch (const Error& e) {
      out.push_back(path.string() + (e.line() ? ":" + std::to_string(e.line()) : "") + ": " + e.what());
    }
  }
  for (const auto& path : inputs.fixtures) {
    const auto text = read_or_report(path);
    if (!text) continue;
    for (const auto& v : ScriptedFixture::validate(*text)) out.push_back(path.string() + ": " + v);
  }
  for (const auto& path : inputs.phrase_tables) {
    const auto text = read_or_report(path);
    if (!text) continue;
    for (const auto& v : PhraseTable::validate(*text)) out.push_back(path.string() + ": " + v);
  }
  for (const auto& path : inputs.configs) {
    const auto text = read_or_report(path);
    if (!text) continue;
    try {
      parse_config(*text);
    } catch (const Error& e) {
      out.push_back(path.string() + ": " + e.what());
    }
  }
  return out;
}

void run_demo(std::istream& in, std::ostream& out, const EngineConfig& config, const LoadedBackend& backend) {
  std::optional<Session> session;
  std::size_t index = 0;
  auto print_events = [&](const std::vector<OutputEvent>& evs) {
    for (const auto& ev : evs) {
      switch (ev.kind) {
        case EventKind::Emit: out << "emit: " << join(ev.toks) << '\n'; break;
        case EventKind::Catchup: out << "catchup: " << join(ev.toks) << '\n'; break;
        case EventKind::End: break;
        default: out << to_string(ev.kind) << '\n'; break;
      }
    }
  };
  auto finish = [&] {
    session->mark_final();
    print_events(session->finalize());
    out << "final: " << join(session->emitted()) << "\n\n";
    session.reset();
  };

  for (std::string line; std::getline(in, line);) {
    const Tokens toks = split_ws(line);
    if (toks.empty()) {
      if (!session) break;
      finish();
      continue;
    }
    bool malformed = false;
    for (const auto& t : toks) malformed = malformed || t == kStartSymbol || t == kEndSymbol;
    if (malformed) {
      out << "warning: reserved symbol in input, line ignored\n";
      continue;
    }
    for (const auto& tok : toks) {
      if (!session) session.emplace(config, backend.context, *backend.predictor, backend.table.get(), index);
      TokenEvent ev{index, tok, static_cast<std::int64_t>(index), false};
      ++index;
      const auto evs = session->feed(ev);
      out << "> " << tok << '\n' << render(session->tree()) << "template: " << session->target().render() << '\n';
      print_events(evs);
    }
  }
  if (session) finish();
}

}  // namespace si
