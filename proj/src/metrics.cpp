#include "specinterp/metrics.hpp"

#include <algorithm>

#include <json.hpp>

#include "specinterp/error.hpp"

namespace si {

double average_lagging(std::span<const std::size_t> g, std::size_t src_len) {
  if (g.empty()) throw Error(ErrorKind::EmptyEmission, "average lagging needs at least one target token");
  if (src_len == 0) throw Error(ErrorKind::EmptyEmission, "average lagging needs at least one source token");
  const double gamma = static_cast<double>(g.size()) / static_cast<double>(src_len);
  std::size_t tau = g.size();
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (g[j] == src_len) {
      tau = j + 1;
      break;
    }
  }
  double sum = 0.0;
  for (std::size_t j = 1; j <= tau; ++j) {
    sum += static_cast<double>(g[j - 1]) - static_cast<double>(j - 1) / gamma;
  }
  return sum / static_cast<double>(tau);
}

double wait_until_end_al(std::size_t src_len, std::size_t tgt_len) {
  const std::vector<std::size_t> g(tgt_len, src_len);
  return average_lagging(g, src_len);
}

double per_token_al(std::size_t src_len, std::size_t tgt_len) {
  std::vector<std::size_t> g(tgt_len);
  for (std::size_t j = 0; j < tgt_len; ++j) g[j] = std::min(j + 1, src_len);
  return average_lagging(g, src_len);
}

std::size_t edit_distance(std::span<const Token> a, std::span<const Token> b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double accuracy(std::span<const Token> final_output, std::span<const Token> reference) {
  const std::size_t longest = std::max(final_output.size(), reference.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(edit_distance(final_output, reference)) / static_cast<double>(longest);
}

SessionReport compute_report(const RunRecord& record) {
  SessionReport r;
  r.emitted_len = record.emitted.size();
  r.source_len = record.source_len;
  r.divergences = record.divergences;
  r.conflicts = record.conflicts;
  r.catchups = record.catchups;
  r.context_shifts = record.context_shifts;
  r.hit_rate = record.source_len == 0 ? 0.0
                                      : static_cast<double>(record.hits) / static_cast<double>(record.source_len);
  if (!record.emitted.empty() && record.source_len > 0) {
    r.al = average_lagging(record.emission_src, record.source_len);
    r.al_wait_until_end = wait_until_end_al(record.source_len, record.emitted.size());
    r.al_per_token = per_token_al(record.source_len, record.emitted.size());
  }
  if (record.reference) r.accuracy = accuracy(record.emitted, *record.reference);
  return r;
}

std::string report_json(const SessionReport& report) {
  nlohmann::ordered_json j;
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
  j["al"] = opt(report.al);
  j["hit_rate"] = report.hit_rate;
  j["divergences"] = report.divergences;
  j["conflicts"] = report.conflicts;
  j["catchups"] = report.catchups;
  j["accuracy"] = opt(report.accuracy);
  j["context_shifts"] = report.context_shifts;
  j["emitted_len"] = report.emitted_len;
  j["source_len"] = report.source_len;
  j["al_wait_until_end"] = opt(report.al_wait_until_end);
  j["al_per_token"] = opt(report.al_per_token);
  return j.dump(2) + "\n";
}

}  // namespace si
