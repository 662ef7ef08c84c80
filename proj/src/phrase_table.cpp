#include "specinterp/phrase_table.hpp"

#include <sstream>

#include "specinterp/error.hpp"

namespace si {

namespace {

Tokens split_ws(std::string_view field) {
  Tokens out;
  std::istringstream in{std::string(field)};
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

// Splits one table line; returns an error message or an empty string.
std::string parse_line(std::string_view line, PhraseEntry& out) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    std::size_t tab = line.find('\t', pos);
    fields.push_back(line.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos));
    if (tab == std::string_view::npos) break;
    pos = tab + 1;
  }
  if (fields.size() < 2 || fields.size() > 3) return "expected 2 or 3 tab-separated fields";
  out.source = split_ws(fields[0]);
  out.target = split_ws(fields[1]);
  out.atomic = false;
  if (fields.size() == 3) {
    const Tokens flag = split_ws(fields[2]);
    if (flag.size() > 1 || (flag.size() == 1 && flag[0] != "atomic")) return "third field must be 'atomic' or empty";
    out.atomic = flag.size() == 1;
  }
  if (out.source.empty()) return "empty source key";
  return {};
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    fn(line, lineno);
  }
}

}  // namespace

PhraseTable::PhraseTable(std::vector<PhraseEntry> entries) {
  for (auto& e : entries) {
    if (e.source.empty()) throw Error(ErrorKind::Fixture, "phrase table: empty source key");
    const std::size_t node = insert(source_trie_, e.source);
    if (source_trie_[node].entry) {
      entries_[*source_trie_[node].entry] = std::move(e);
    } else {
      source_trie_[node].entry = entries_.size();
      entries_.push_back(std::move(e));
    }
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    max_source_len_ = std::max(max_source_len_, e.source.size());
    if (e.atomic && !e.target.empty()) idiom_trie_[insert(idiom_trie_, e.target)].entry = i;
  }
}

PhraseTable PhraseTable::parse(std::string_view text) {
  std::vector<PhraseEntry> entries;
  for_each_line(text, [&](std::string_view line, std::size_t lineno) {
    PhraseEntry e;
    if (auto err = parse_line(line, e); !err.empty()) {
      throw Error(ErrorKind::Fixture, "phrase table line " + std::to_string(lineno) + ": " + err, lineno);
    }
    entries.push_back(std::move(e));
  });
  return PhraseTable(std::move(entries));
}

std::vector<std::string> PhraseTable::validate(std::string_view text) {
  std::vector<std::string> problems;
  std::vector<Tokens> seen;
  for_each_line(text, [&](std::string_view line, std::size_t lineno) {
    PhraseEntry e;
    if (auto err = parse_line(line, e); !err.empty()) {
      problems.push_back("line " + std::to_string(lineno) + ": " + err);
      return;
    }
    for (const auto& s : seen) {
      if (s == e.source) problems.push_back("line " + std::to_string(lineno) + ": duplicate source key");
    }
    seen.push_back(e.source);
  });
  return problems;
}

std::size_t PhraseTable::insert(std::vector<Node>& trie, std::span<const Token> key) {
  std::size_t node = 0;
  for (const auto& tok : key) {
    auto it = trie[node].next.find(tok);
    if (it == trie[node].next.end()) {
      trie.emplace_back();
      it = trie[node].next.emplace(tok, trie.size() - 1).first;
    }
    node = it->second;
  }
  return node;
}

PhraseTable::Match PhraseTable::longest(const std::vector<Node>& trie, std::span<const Token> input) {
  Match m;
  std::size_t node = 0;
  std::size_t depth = 0;
  while (true) {
    if (depth == input.size()) {
      m.could_extend = !trie[node].next.empty();
      break;
    }
    auto it = trie[node].next.find(input[depth]);
    if (it == trie[node].next.end()) break;
    node = it->second;
    ++depth;
    if (trie[node].entry) {
      m.length = depth;
      m.entry = trie[node].entry;
    }
  }
  return m;
}

Tokens PhraseTable::translate(std::span<const Token> source) const {
  Tokens out;
  std::size_t i = 0;
  while (i < source.size()) {
    const Match m = longest(source_trie_, source.subspan(i));
    if (m.entry) {
      const auto& tgt = entries_[*m.entry].target;
      out.insert(out.end(), tgt.begin(), tgt.end());
      i += m.length;
    } else {
      out.push_back(source[i]);
      ++i;
    }
  }
  return out;
}

StableTranslation PhraseTable::translate_stable(std::span<const Token> source) const {
  StableTranslation st;
  std::size_t i = 0;
  while (i < source.size()) {
    const Match m = longest(source_trie_, source.subspan(i));
    if (m.could_extend) break;
    if (m.entry) {
      const auto& tgt = entries_[*m.entry].target;
      st.target.insert(st.target.end(), tgt.begin(), tgt.end());
      i += m.length;
    } else {
      st.target.push_back(source[i]);
      ++i;
    }
  }
  st.consumed = i;
  return st;
}

std::vector<IdiomSpan> PhraseTable::idiom_spans(std::span<const Token> target) const {
  std::vector<IdiomSpan> spans;
  std::size_t i = 0;
  while (i < target.size()) {
    const Match m = longest(idiom_trie_, target.subspan(i));
    if (m.entry) {
      spans.push_back({i, i + m.length});
      i += m.length;
    } else {
      ++i;
    }
  }
  return spans;
}

}  // namespace si
