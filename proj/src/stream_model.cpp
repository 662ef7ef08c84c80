#include "specinterp/stream_model.hpp"

#include <json.hpp>

#include "specinterp/error.hpp"

namespace si {

using ordered_json = nlohmann::ordered_json;

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::NonMonotonicTime: return "NonMonotonicTime";
    case ErrorKind::MissingFinalMarker: return "MissingFinalMarker";
    case ErrorKind::IndexGap: return "IndexGap";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::NoPrediction: return "NoPrediction";
    case ErrorKind::OutOfOrderToken: return "OutOfOrderToken";
    case ErrorKind::EmptyEmission: return "EmptyEmission";
    case ErrorKind::NoReference: return "NoReference";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Fixture: return "Fixture";
  }
  return "Unknown";
}

std::vector<std::span<const TokenEvent>> Transcript::utterances() const {
  std::vector<std::span<const TokenEvent>> out;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].is_final) {
      out.emplace_back(events.data() + begin, i + 1 - begin);
      begin = i + 1;
    }
  }
  return out;
}

namespace {

[[noreturn]] void fail(ErrorKind kind, std::size_t line, const std::string& msg) {
  throw Error(kind, "line " + std::to_string(line) + ": " + msg, line);
}

nlohmann::json parse_line(std::string_view line, std::size_t lineno) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    fail(ErrorKind::MalformedRecord, lineno, "not a JSON object");
  }
  return j;
}

Tokens token_array(const nlohmann::json& j, std::size_t lineno, const char* field) {
  if (!j.is_array()) fail(ErrorKind::MalformedRecord, lineno, std::string(field) + " must be an array");
  Tokens out;
  out.reserve(j.size());
  for (const auto& t : j) {
    if (!t.is_string()) fail(ErrorKind::MalformedRecord, lineno, std::string(field) + " must hold strings");
    out.push_back(t.get<std::string>());
  }
  return out;
}

}  // namespace

Transcript parse_transcript(std::string_view text) {
  Transcript tr;
  bool have_header = false;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    nlohmann::json j = parse_line(line, lineno);
    if (!have_header) {
      if (!j.contains("src") || !j["src"].is_string() || !j.contains("tgt") || !j["tgt"].is_string()) {
        fail(ErrorKind::MalformedRecord, lineno, "header needs string fields src and tgt");
      }
      tr.source_lang = j["src"].get<std::string>();
      tr.target_lang = j["tgt"].get<std::string>();
      if (tr.source_lang.empty() || tr.target_lang.empty()) {
        fail(ErrorKind::MalformedRecord, lineno, "language tags must be non-empty");
      }
      if (j.contains("ref")) tr.reference = token_array(j["ref"], lineno, "ref");
      have_header = true;
      continue;
    }

    if (!j.contains("i") || !j["i"].is_number_integer() || !j.contains("tok") || !j["tok"].is_string() ||
        !j.contains("t_ms") || !j["t_ms"].is_number_integer()) {
      fail(ErrorKind::MalformedRecord, lineno, "record needs integer i, string tok, integer t_ms");
    }
    if (j.contains("final") && !j["final"].is_boolean()) {
      fail(ErrorKind::MalformedRecord, lineno, "final must be a boolean");
    }
    TokenEvent ev;
    const auto idx = j["i"].get<std::int64_t>();
    ev.surface = j["tok"].get<std::string>();
    ev.t_ms = j["t_ms"].get<std::int64_t>();
    ev.is_final = j.value("final", false);
    if (idx != static_cast<std::int64_t>(tr.events.size())) {
      fail(ErrorKind::IndexGap, lineno,
           "expected index " + std::to_string(tr.events.size()) + ", got " + std::to_string(idx));
    }
    ev.index = static_cast<std::size_t>(idx);
    if (!tr.events.empty() && ev.t_ms < tr.events.back().t_ms) {
      fail(ErrorKind::NonMonotonicTime, lineno,
           "t_ms " + std::to_string(ev.t_ms) + " after " + std::to_string(tr.events.back().t_ms));
    }
    tr.events.push_back(std::move(ev));
  }
  if (!have_header) throw Error(ErrorKind::MalformedRecord, "missing header line", 1);
  if (tr.events.empty() || !tr.events.back().is_final) {
    throw Error(ErrorKind::MissingFinalMarker, "last event must carry \"final\":true");
  }
  return tr;
}

std::string serialize_transcript(const Transcript& transcript) {
  std::string out;
  ordered_json header;
  header["src"] = transcript.source_lang;
  header["tgt"] = transcript.target_lang;
  if (transcript.reference) header["ref"] = *transcript.reference;
  out += header.dump();
  out += '\n';
  for (const auto& ev : transcript.events) {
    ordered_json rec;
    rec["i"] = ev.index;
    rec["tok"] = ev.surface;
    rec["t_ms"] = ev.t_ms;
    if (ev.is_final) rec["final"] = true;
    out += rec.dump();
    out += '\n';
  }
  return out;
}

std::vector<std::string> validate_config(const EngineConfig& cfg) {
  std::vector<std::string> v;
  if (!(cfg.epsilon > 0.0)) v.emplace_back("0 < epsilon");
  if (!(cfg.epsilon < cfg.tau)) v.emplace_back("epsilon < tau");
  if (!(cfg.tau <= 1.0)) v.emplace_back("tau <= 1");
  if (cfg.k < 1) v.emplace_back("k >= 1");
  if (cfg.d < 1) v.emplace_back("d >= 1");
  if (cfg.buffer_limit < 1) v.emplace_back("buffer_limit >= 1");
  if (!(cfg.drift_ratio > 1.0)) v.emplace_back("drift_ratio > 1");
  if (cfg.drift_window < 1) v.emplace_back("drift_window >= 1");
  return v;
}

EngineConfig parse_config(std::string_view json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorKind::InvalidConfig, "config is not a JSON object");
  EngineConfig cfg;
  auto get_count = [&](const char* key, std::size_t& dst) {
    if (!j.contains(key)) return;
    const auto& v = j[key];
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      throw Error(ErrorKind::InvalidConfig, std::string(key) + " must be a non-negative integer");
    }
    dst = v.get<std::size_t>();
  };
  auto get_real = [&](const char* key, double& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) throw Error(ErrorKind::InvalidConfig, std::string(key) + " must be a number");
    dst = j[key].get<double>();
  };
  for (const auto& [key, _] : j.items()) {
    static const char* known[] = {"k", "d", "epsilon", "tau", "buffer_limit", "drift_ratio", "drift_window"};
    bool ok = false;
    for (const char* kk : known) ok = ok || key == kk;
    if (!ok) throw Error(ErrorKind::InvalidConfig, "unknown config key '" + key + "'");
  }
  get_count("k", cfg.k);
  get_count("d", cfg.d);
  get_real("epsilon", cfg.epsilon);
  get_real("tau", cfg.tau);
  get_count("buffer_limit", cfg.buffer_limit);
  get_real("drift_ratio", cfg.drift_ratio);
  get_count("drift_window", cfg.drift_window);
  auto violations = validate_config(cfg);
  if (!violations.empty()) {
    std::string msg = "invalid config:";
    for (const auto& s : violations) msg += " [" + s + "]";
    throw Error(ErrorKind::InvalidConfig, msg);
  }
  return cfg;
}

std::string serialize_config(const EngineConfig& cfg) {
  ordered_json j;
  j["k"] = cfg.k;
  j["d"] = cfg.d;
  j["epsilon"] = cfg.epsilon;
  j["tau"] = cfg.tau;
  j["buffer_limit"] = cfg.buffer_limit;
  j["drift_ratio"] = cfg.drift_ratio;
  j["drift_window"] = cfg.drift_window;
  return j.dump(2);
}

}  // namespace si
