#include "specinterp/predictor.hpp"

#include <set>

#include <json.hpp>

#include "specinterp/error.hpp"

namespace si {

std::optional<double> Predictor::perplexity(std::span<const Token>) const { return std::nullopt; }

namespace {

struct FixtureParse {
  ScriptedFixture fixture;
  std::vector<std::string> problems;
};

bool is_token_array(const nlohmann::json& j) {
  if (!j.is_array()) return false;
  for (const auto& t : j) {
    if (!t.is_string()) return false;
  }
  return true;
}

FixtureParse parse_fixture(std::string_view text) {
  FixtureParse out;
  auto& problems = out.problems;
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    problems.emplace_back("fixture is not a JSON object");
    return out;
  }

  std::set<std::string> context_ids;
  if (j.contains("contexts")) {
    if (!j["contexts"].is_array()) {
      problems.emplace_back("contexts must be an array");
    } else {
      for (std::size_t i = 0; i < j["contexts"].size(); ++i) {
        const auto& c = j["contexts"][i];
        const std::string where = "contexts[" + std::to_string(i) + "]: ";
        if (!c.is_object() || !c.contains("id") || !c["id"].is_string()) {
          problems.push_back(where + "needs a string id");
          continue;
        }
        ContextDoc doc;
        doc.id = c["id"].get<std::string>();
        if (c.contains("body")) {
          if (!is_token_array(c["body"])) {
            problems.push_back(where + "body must be an array of strings");
          } else {
            doc.body = c["body"].get<Tokens>();
          }
        }
        if (!context_ids.insert(doc.id).second) problems.push_back(where + "duplicate context id '" + doc.id + "'");
        out.fixture.contexts.push_back(std::move(doc));
      }
    }
  }

  std::set<std::pair<std::string, Tokens>> keys;
  if (!j.contains("predictions") || !j["predictions"].is_array()) {
    problems.emplace_back("predictions must be an array");
    return out;
  }
  for (std::size_t i = 0; i < j["predictions"].size(); ++i) {
    const auto& e = j["predictions"][i];
    const std::string where = "predictions[" + std::to_string(i) + "]: ";
    if (!e.is_object() || !e.contains("context") || !e["context"].is_string() || !e.contains("prefix") ||
        !is_token_array(e["prefix"]) || !e.contains("items") || !e["items"].is_array()) {
      problems.push_back(where + "needs string context, string-array prefix, items array");
      continue;
    }
    ScriptedFixture::Entry entry;
    entry.context = e["context"].get<std::string>();
    entry.prefix = e["prefix"].get<Tokens>();
    if (!context_ids.empty() && !context_ids.count(entry.context)) {
      problems.push_back(where + "unknown context '" + entry.context + "'");
    }
    if (!keys.emplace(entry.context, entry.prefix).second) problems.push_back(where + "duplicate (context, prefix)");
    double sum = 0.0;
    for (std::size_t n = 0; n < e["items"].size(); ++n) {
      const auto& it = e["items"][n];
      const std::string iw = where + "item " + std::to_string(n) + ": ";
      if (!it.is_object() || !it.contains("cont") || !is_token_array(it["cont"]) || !it.contains("p") ||
          !it["p"].is_number() || !it.contains("tr") || !is_token_array(it["tr"])) {
        problems.push_back(iw + "needs cont, p, tr");
        continue;
      }
      if (it.contains("open") && !it["open"].is_boolean()) problems.push_back(iw + "open must be a boolean");
      Prediction p;
      p.continuation = it["cont"].get<Tokens>();
      p.p = it["p"].get<double>();
      p.translation = it["tr"].get<Tokens>();
      p.complete = !it.value("open", false);
      if (p.continuation.empty()) problems.push_back(iw + "empty continuation");
      if (!(p.p > 0.0 && p.p <= 1.0)) problems.push_back(iw + "p outside (0,1]");
      sum += p.p;
      entry.items.push_back(std::move(p));
    }
    if (sum > 1.0 + 1e-9) problems.push_back(where + "sum of p is " + std::to_string(sum) + " > 1");
    out.fixture.entries.push_back(std::move(entry));
  }
  return out;
}

}  // namespace

ScriptedFixture ScriptedFixture::parse(std::string_view json_text) {
  auto parsed = parse_fixture(json_text);
  if (!parsed.problems.empty()) {
    std::string msg = "scripted fixture invalid:";
    for (const auto& p : parsed.problems) msg += "\n  " + p;
    throw Error(ErrorKind::Fixture, msg);
  }
  return std::move(parsed.fixture);
}

std::vector<std::string> ScriptedFixture::validate(std::string_view json_text) {
  return parse_fixture(json_text).problems;
}

const ContextDoc* ScriptedFixture::find_context(std::string_view id) const {
  for (const auto& c : contexts) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

ScriptedPredictor::ScriptedPredictor(ScriptedFixture fixture) : fixture_(std::move(fixture)) {
  for (std::size_t i = 0; i < fixture_.entries.size(); ++i) {
    const auto& e = fixture_.entries[i];
    index_[{e.context, e.prefix}] = i;
  }
}

std::optional<PredictionSet> ScriptedPredictor::predict(const ContextDoc& context, std::span<const Token> prefix,
                                                        std::size_t k, std::span<const Token>) const {
  auto it = index_.find({context.id, Tokens(prefix.begin(), prefix.end())});
  if (it == index_.end()) return std::nullopt;
  return make_prediction_set(fixture_.entries[it->second].items, k, prefix.size());
}

NgramPredictor::NgramPredictor(std::shared_ptr<const NgramModel> model, std::shared_ptr<const PhraseTable> table,
                               std::size_t max_len)
    : model_(std::move(model)), table_(std::move(table)), max_len_(max_len) {
  if (!model_) throw Error(ErrorKind::InvalidConfig, "NgramPredictor needs a model");
  if (max_len_ < 1) throw Error(ErrorKind::InvalidConfig, "max_len must be >= 1");
}

std::optional<PredictionSet> NgramPredictor::predict(const ContextDoc&, std::span<const Token> prefix, std::size_t k,
                                                     std::span<const Token>) const {
  PredictionSet ps = ngram_continuations(*model_, prefix, k, max_len_);
  Tokens sentence;
  for (auto& item : ps.items) {
    sentence.assign(prefix.begin(), prefix.end());
    sentence.insert(sentence.end(), item.continuation.begin(), item.continuation.end());
    if (!table_) {
      item.translation = sentence;
    } else if (item.complete) {
      item.translation = table_->translate(sentence);
    } else {
      item.translation = table_->translate_stable(sentence).target;
    }
  }
  return ps;
}

std::optional<double> NgramPredictor::perplexity(std::span<const Token> window) const {
  if (window.empty()) return std::nullopt;
  return si::perplexity(*model_, window);
}

}  // namespace si
