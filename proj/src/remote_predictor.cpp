#include <httplib.h>

#include <json.hpp>

#include "specinterp/predictor.hpp"

namespace si {

RemotePredictor::RemotePredictor(std::string endpoint, std::chrono::milliseconds budget, std::string path)
    : endpoint_(std::move(endpoint)), budget_(budget), path_(std::move(path)) {}

PredictionSet parse_remote_response(std::string_view body, std::size_t k, std::size_t prefix_len) {
  auto bad = [](const std::string& msg) { return RemoteError(RemoteFailure::MalformedResponse, msg); };
  nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("items") || !j["items"].is_array()) {
    throw bad("response needs an items array");
  }
  std::vector<Prediction> items;
  try {
    for (const auto& it : j["items"]) {
      Prediction p;
      p.continuation = it.at("cont").get<Tokens>();
      p.p = it.at("p").get<double>();
      p.translation = it.at("tr").get<Tokens>();
      p.complete = !it.value("open", false);
      if (p.continuation.empty()) throw bad("empty continuation");
      if (!(p.p > 0.0 && p.p <= 1.0)) throw bad("probability outside (0,1]");
      items.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw bad(e.what());
  }
  PredictionSet ps = make_prediction_set(std::move(items), k, prefix_len);
  double sum = 0.0;
  for (const auto& it : ps.items) sum += it.p;
  if (sum > 1.0) {
    for (auto& it : ps.items) it.p /= sum;
    ps.other_mass = 0.0;
  }
  return ps;
}

PredictionSet RemotePredictor::request(const ContextDoc& context, std::span<const Token> prefix, std::size_t k,
                                       std::span<const Token> aux) const {
  nlohmann::ordered_json req;
  req["context_id"] = context.id;
  req["prefix"] = Tokens(prefix.begin(), prefix.end());
  req["k"] = k;
  if (!aux.empty()) req["aux"] = Tokens(aux.begin(), aux.end());

  httplib::Client cli(endpoint_);
  if (!cli.is_valid()) throw RemoteError(RemoteFailure::Unreachable, "invalid endpoint '" + endpoint_ + "'");
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(budget_);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(budget_ - secs);
  cli.set_connection_timeout(static_cast<time_t>(secs.count()), static_cast<time_t>(usecs.count()));
  cli.set_read_timeout(static_cast<time_t>(secs.count()), static_cast<time_t>(usecs.count()));
  cli.set_write_timeout(static_cast<time_t>(secs.count()), static_cast<time_t>(usecs.count()));

  const auto started = std::chrono::steady_clock::now();
  auto res = cli.Post(path_, req.dump(), "application/json");
  if (!res) {
    const auto elapsed = std::chrono::steady_clock::now() - started;
    const auto err = res.error();
    if (err == httplib::Error::ConnectionTimeout || (err == httplib::Error::Read && elapsed >= budget_)) {
      throw RemoteError(RemoteFailure::Timeout, "no response within " + std::to_string(budget_.count()) + " ms");
    }
    throw RemoteError(RemoteFailure::Unreachable, "request failed: " + httplib::to_string(err));
  }
  if (res->status != 200) {
    throw RemoteError(RemoteFailure::Unreachable, "HTTP status " + std::to_string(res->status));
  }
  return parse_remote_response(res->body, k, prefix.size());
}

std::optional<PredictionSet> RemotePredictor::predict(const ContextDoc& context, std::span<const Token> prefix,
                                                      std::size_t k, std::span<const Token> aux) const {
  try {
    return request(context, prefix, k, aux);
  } catch (const RemoteError&) {
    return std::nullopt;
  }
}

}  // namespace si
