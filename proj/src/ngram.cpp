#include "specinterp/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

#include "specinterp/error.hpp"
#include "specinterp/kernels.hpp"

namespace si {

std::size_t NgramModel::KeyHash::operator()(const std::vector<Id>& key) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (Id id : key) {
    h ^= id;
    h *= 1099511628211ull;
  }
  return h;
}

NgramModel::NgramModel() : vocab_{kEndSymbol}, end_id_(0), levels_(1) {}

NgramModel NgramModel::train(std::span<const Tokens> corpus, std::size_t order, double alpha) {
  if (corpus.empty()) throw Error(ErrorKind::EmptyCorpus, "corpus has no sentences");
  if (order < 1) throw Error(ErrorKind::InvalidConfig, "order must be >= 1");
  if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidConfig, "alpha must be > 0");

  std::set<Token> vocab{kEndSymbol};
  for (const auto& sentence : corpus) {
    for (const auto& tok : sentence) {
      if (tok == kStartSymbol || tok == kEndSymbol) {
        throw Error(ErrorKind::MalformedRecord, "corpus uses reserved symbol '" + tok + "'");
      }
      vocab.insert(tok);
    }
  }

  NgramModel m;
  m.order_ = order;
  m.alpha_ = alpha;
  m.vocab_.assign(vocab.begin(), vocab.end());
  m.end_id_ = *m.id(kEndSymbol);
  m.levels_.assign(order, Level{});

  std::vector<Id> padded;
  for (const auto& sentence : corpus) {
    padded.assign(order - 1, m.start_id());
    for (const auto& tok : sentence) padded.push_back(*m.id(tok));
    padded.push_back(m.end_id_);
    for (std::size_t j = order - 1; j < padded.size(); ++j) {
      for (std::size_t len = 0; len < order; ++len) {
        std::vector<Id> hist(padded.begin() + static_cast<std::ptrdiff_t>(j - len),
                             padded.begin() + static_cast<std::ptrdiff_t>(j));
        Row& row = m.levels_[len][hist];
        row.total += 1;
        auto it = std::lower_bound(row.counts.begin(), row.counts.end(), padded[j],
                                   [](const auto& e, Id v) { return e.first < v; });
        if (it != row.counts.end() && it->first == padded[j]) {
          it->second += 1;
        } else {
          row.counts.insert(it, {padded[j], 1});
        }
      }
    }
  }
  return m;
}

std::optional<NgramModel::Id> NgramModel::id(std::string_view token) const {
  auto it = std::lower_bound(vocab_.begin(), vocab_.end(), token);
  if (it == vocab_.end() || *it != token) return std::nullopt;
  return static_cast<Id>(it - vocab_.begin());
}

std::vector<NgramModel::Id> NgramModel::to_ids(std::span<const Token> tokens) const {
  std::vector<Id> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (t == kStartSymbol) {
      out.push_back(start_id());
    } else {
      out.push_back(id(t).value_or(unknown_id()));
    }
  }
  return out;
}

std::uint64_t NgramModel::count(std::span<const Token> history, std::string_view token) const {
  if (history.size() + 1 != order_) return 0;
  const auto tok = id(token);
  if (!tok) return 0;
  const auto hist = to_ids(history);
  const auto it = levels_.back().find(hist);
  if (it == levels_.back().end()) return 0;
  for (const auto& [w, c] : it->second.counts) {
    if (w == *tok) return c;
  }
  return 0;
}

std::pair<const NgramModel::Row*, std::size_t> NgramModel::lookup(std::span<const Id> context) const {
  const std::size_t want = order_ - 1;
  std::vector<Id> hist(want, start_id());
  const std::size_t take = std::min(want, context.size());
  std::copy(context.end() - static_cast<std::ptrdiff_t>(take), context.end(),
            hist.end() - static_cast<std::ptrdiff_t>(take));
  for (std::size_t len = want + 1; len-- > 0;) {
    std::vector<Id> key(hist.end() - static_cast<std::ptrdiff_t>(len), hist.end());
    auto it = levels_[len].find(key);
    if (it != levels_[len].end()) return {&it->second, want - len};
  }
  return {nullptr, want + 1};
}

void NgramModel::conditional_ids(std::span<const Id> context, std::vector<double>& out) const {
  const std::size_t v = vocab_.size();
  const auto [row, dropped] = lookup(context);
  std::vector<double> counts(v, 0.0);
  std::uint64_t total = 0;
  if (row != nullptr) {
    total = row->total;
    for (const auto& [w, c] : row->counts) counts[w] = static_cast<double>(c);
  }
  out.resize(v);
  const double denom = static_cast<double>(total) + alpha_ * static_cast<double>(v);
  kernels::smoothed_row(counts, alpha_, denom, out);
  if (dropped > 0) {
    kernels::scale(out, std::pow(kBackoffFactor, static_cast<double>(dropped)));
    kernels::scale(out, 1.0 / kernels::lane_sum(out));
  }
}

std::vector<double> NgramModel::conditional(std::span<const Token> context) const {
  std::vector<double> out;
  conditional_ids(to_ids(context), out);
  return out;
}

double NgramModel::probability(std::span<const Token> context, std::string_view token) const {
  const auto ids = to_ids(context);
  if (const auto tok = id(token)) {
    std::vector<double> row;
    conditional_ids(ids, row);
    return row[*tok];
  }
  const auto [row, dropped] = lookup(ids);
  const double total = row ? static_cast<double>(row->total) : 0.0;
  return alpha_ / (total + alpha_ * static_cast<double>(vocab_.size()));
}

std::string NgramModel::serialize() const {
  nlohmann::ordered_json j;
  j["format"] = "specinterp-ngram";
  j["version"] = 1;
  j["order"] = order_;
  j["alpha"] = alpha_;
  j["vocab"] = vocab_;
  auto levels = nlohmann::ordered_json::array();
  for (const auto& level : levels_) {
    std::map<std::vector<Id>, const Row*> sorted;
    for (const auto& [hist, row] : level) sorted.emplace(hist, &row);
    auto rows = nlohmann::ordered_json::array();
    for (const auto& [hist, row] : sorted) {
      nlohmann::ordered_json r;
      r["h"] = hist;
      auto counts = nlohmann::ordered_json::array();
      for (const auto& [w, c] : row->counts) counts.push_back({w, c});
      r["c"] = counts;
      rows.push_back(std::move(r));
    }
    levels.push_back(std::move(rows));
  }
  j["levels"] = std::move(levels);
  return j.dump() + "\n";
}

NgramModel NgramModel::deserialize(std::string_view text) {
  auto bad = [](const std::string& msg) { return Error(ErrorKind::MalformedRecord, "model file: " + msg); };
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw bad("not a JSON object");
  try {
    if (j.at("format") != "specinterp-ngram" || j.at("version") != 1) throw bad("unsupported format");
    NgramModel m;
    m.order_ = j.at("order").get<std::size_t>();
    m.alpha_ = j.at("alpha").get<double>();
    m.vocab_ = j.at("vocab").get<Tokens>();
    if (m.order_ < 1 || !(m.alpha_ > 0.0)) throw bad("order/alpha out of range");
    if (!std::is_sorted(m.vocab_.begin(), m.vocab_.end()) ||
        std::adjacent_find(m.vocab_.begin(), m.vocab_.end()) != m.vocab_.end()) {
      throw bad("vocab must be sorted and unique");
    }
    const auto end = m.id(kEndSymbol);
    if (!end) throw bad("vocab lacks the end symbol");
    m.end_id_ = *end;
    const auto& levels = j.at("levels");
    if (!levels.is_array() || levels.size() != m.order_) throw bad("expected one level per order");
    m.levels_.assign(m.order_, Level{});
    for (std::size_t len = 0; len < m.order_; ++len) {
      for (const auto& r : levels[len]) {
        auto hist = r.at("h").get<std::vector<Id>>();
        if (hist.size() != len) throw bad("history length mismatch");
        for (Id h : hist) {
          if (h > m.start_id()) throw bad("history id out of range");
        }
        Row row;
        for (const auto& e : r.at("c")) {
          const auto w = e.at(0).get<Id>();
          const auto c = e.at(1).get<std::uint64_t>();
          if (w >= m.vocab_.size()) throw bad("token id out of range");
          if (!row.counts.empty() && row.counts.back().first >= w) throw bad("counts not sorted by id");
          row.counts.emplace_back(w, c);
          row.total += c;
        }
        m.levels_[len].emplace(std::move(hist), std::move(row));
      }
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw bad(e.what());
  }
}

namespace {

// Sorted children of one expanded partial hypothesis; siblings are pushed
// lazily, one at a time, in rank order.
struct Expansion {
  std::vector<NgramModel::Id> seq;
  double p = 1.0;
  std::vector<double> row;
  std::vector<NgramModel::Id> order;
};

struct Candidate {
  double p;
  std::vector<NgramModel::Id> seq;
  std::size_t expansion;
  std::size_t rank;
};

}  // namespace

PredictionSet ngram_continuations(const NgramModel& model, std::span<const Token> prefix, std::size_t k,
                                  std::size_t max_len) {
  if (max_len < 1) throw Error(ErrorKind::InvalidConfig, "max_len must be >= 1");
  const auto& vocab = model.vocab();
  const auto prefix_ids = model.to_ids(prefix);

  // Vocab ids are in byte-wise token order, so comparing id sequences is the
  // same as comparing token sequences.
  auto worse = [](const Candidate& a, const Candidate& b) {
    if (a.p != b.p) return a.p < b.p;
    return a.seq > b.seq;
  };
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(worse)> heap(worse);
  std::vector<Expansion> expansions;
  std::vector<NgramModel::Id> context = prefix_ids;

  auto expand = [&](std::vector<NgramModel::Id> seq, double p) {
    Expansion e;
    e.seq = std::move(seq);
    e.p = p;
    context.resize(prefix_ids.size());
    context.insert(context.end(), e.seq.begin(), e.seq.end());
    model.conditional_ids(context, e.row);
    e.order.resize(vocab.size());
    std::iota(e.order.begin(), e.order.end(), 0u);
    std::stable_sort(e.order.begin(), e.order.end(),
                     [&](NgramModel::Id a, NgramModel::Id b) { return e.row[a] > e.row[b]; });
    expansions.push_back(std::move(e));
  };
  auto push_child = [&](std::size_t ex, std::size_t rank) {
    const Expansion& e = expansions[ex];
    if (rank >= e.order.size()) return;
    Candidate c;
    c.seq = e.seq;
    c.seq.push_back(e.order[rank]);
    c.p = e.p * e.row[e.order[rank]];
    c.expansion = ex;
    c.rank = rank;
    heap.push(std::move(c));
  };

  expand({}, 1.0);
  push_child(0, 0);

  std::vector<Prediction> found;
  while (!heap.empty() && found.size() < k) {
    Candidate c = heap.top();
    heap.pop();
    push_child(c.expansion, c.rank + 1);
    const bool ended = c.seq.back() == model.end_id();
    if (ended && c.seq.size() == 1) continue;  // immediate end is not a continuation
    if (ended || c.seq.size() >= max_len) {
      Prediction pred;
      pred.p = c.p;
      pred.complete = ended;
      for (std::size_t i = 0; i + (ended ? 1 : 0) < c.seq.size(); ++i) pred.continuation.push_back(vocab[c.seq[i]]);
      found.push_back(std::move(pred));
    } else {
      expand(c.seq, c.p);
      push_child(expansions.size() - 1, 0);
    }
  }

  PredictionSet ps;
  ps.items = std::move(found);
  double sum = 0.0;
  for (const auto& it : ps.items) sum += it.p;
  ps.other_mass = 1.0 - sum;
  ps.prefix_len = prefix.size();
  return ps;
}

double perplexity(const NgramModel& model, std::span<const Token> window) {
  if (window.empty()) throw Error(ErrorKind::InvalidConfig, "perplexity needs a non-empty window");
  double log_sum = 0.0;
  for (std::size_t i = 0; i < window.size(); ++i) {
    log_sum += std::log(model.probability(window.subspan(0, i), window[i]));
  }
  return std::exp(-log_sum / static_cast<double>(window.size()));
}

std::vector<Tokens> read_corpus(std::string_view text) {
  std::vector<Tokens> corpus;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    Tokens sentence;
    for (std::string tok; ls >> tok;) sentence.push_back(tok);
    if (!sentence.empty()) corpus.push_back(std::move(sentence));
  }
  return corpus;
}

}  // namespace si
