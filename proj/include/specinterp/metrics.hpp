#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specinterp/stream_model.hpp"

namespace si {

// Average lagging. g[j-1] is the number of source tokens heard when target
// token j was emitted (non-decreasing, <= src_len); T = g.size().
//   gamma = T / S, tau = first j with g(j) = S (T if none),
//   AL = (1/tau) * sum_{j=1..tau} (g(j) - (j-1)/gamma).
// Throws EmptyEmission when T == 0.
double average_lagging(std::span<const std::size_t> g, std::size_t src_len);

/// AL of emitting everything after the last source token.
double wait_until_end_al(std::size_t src_len, std::size_t tgt_len);
/// AL of g(j) = min(j, S): one target token per source token.
double per_token_al(std::size_t src_len, std::size_t tgt_len);

std::size_t edit_distance(std::span<const Token> a, std::span<const Token> b);

/// 1 - lev(final, reference) / max(|final|, |reference|); two empty sequences score 1.
double accuracy(std::span<const Token> final_output, std::span<const Token> reference);

/// Everything compute_report() needs; the harness can rebuild it from an event log.
struct RunRecord {
  Tokens emitted;
  /// Source tokens heard when each emitted token went out (same length as `emitted`).
  std::vector<std::size_t> emission_src;
  std::size_t source_len = 0;
  std::size_t hits = 0;
  std::size_t divergences = 0;
  std::size_t conflicts = 0;
  std::size_t catchups = 0;
  std::size_t context_shifts = 0;
  std::optional<Tokens> reference;
};

struct SessionReport {
  std::optional<double> al;  // absent when nothing was emitted
  double hit_rate = 0.0;
  std::size_t divergences = 0;
  std::size_t conflicts = 0;
  std::size_t catchups = 0;
  std::size_t context_shifts = 0;
  std::optional<double> accuracy;  // absent without a reference
  std::size_t emitted_len = 0;
  std::size_t source_len = 0;
  std::optional<double> al_wait_until_end;
  std::optional<double> al_per_token;

  bool operator==(const SessionReport&) const = default;
};

SessionReport compute_report(const RunRecord& record);

// {"al":..,"hit_rate":..,"divergences":..,"conflicts":..,"catchups":..,
//  "accuracy":..,...}; absent optionals are written as null.
std::string report_json(const SessionReport& report);

}  // namespace si
