#include "specinterp/prediction.hpp"

#include <algorithm>
#include <cmath>

namespace si {

Tokens ranking_key(const Prediction& p) {
  Tokens key = p.continuation;
  if (p.complete) key.emplace_back(kEndSymbol);
  return key;
}

bool ranks_before(const Prediction& a, const Prediction& b) {
  if (a.p != b.p) return a.p > b.p;
  return ranking_key(a) < ranking_key(b);
}

PredictionSet make_prediction_set(std::vector<Prediction> items, std::size_t k, std::size_t prefix_len) {
  std::stable_sort(items.begin(), items.end(), ranks_before);
  if (items.size() > k) items.resize(k);
  PredictionSet ps;
  ps.items = std::move(items);
  double sum = 0.0;
  for (const auto& it : ps.items) sum += it.p;
  ps.other_mass = 1.0 - sum;
  ps.prefix_len = prefix_len;
  return ps;
}

PredictionSet no_prediction(std::size_t prefix_len) {
  PredictionSet ps;
  ps.prefix_len = prefix_len;
  return ps;
}

std::vector<std::string> validate_prediction_set(const PredictionSet& ps, std::size_t k) {
  std::vector<std::string> v;
  double sum = 0.0;
  for (std::size_t i = 0; i < ps.items.size(); ++i) {
    const auto& it = ps.items[i];
    const std::string where = "item " + std::to_string(i) + ": ";
    if (it.continuation.empty()) v.push_back(where + "empty continuation");
    if (!(it.p > 0.0 && it.p <= 1.0)) v.push_back(where + "p outside (0,1]");
    if (i > 0 && ranks_before(it, ps.items[i - 1])) v.push_back(where + "not sorted by p descending");
    sum += it.p;
  }
  if (sum > 1.0 + 1e-9) v.push_back("sum of p exceeds 1 (" + std::to_string(sum) + ")");
  if (ps.other_mass < -1e-9) v.push_back("negative other_mass");
  if (std::abs(ps.other_mass - (1.0 - sum)) > 1e-9) v.push_back("other_mass != 1 - sum(p)");
  if (k > 0 && ps.items.size() > k) v.push_back("more than k items");
  return v;
}

}  // namespace si
