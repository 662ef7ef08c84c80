#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "specinterp/error.hpp"
#include "specinterp/predictor.hpp"

using namespace si;
using namespace std::chrono_literals;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const Tokens kGoldenPrefix{"私は", "昨日", "、", "友達", "と"};

// In-process HTTP server for the remote backend.
class FakeServer {
 public:
  FakeServer() {
    server_.Post("/predict", [this](const httplib::Request& req, httplib::Response& res) {
      last_request = nlohmann::json::parse(req.body);
      res.set_content(R"({"items":[{"cont":["a"],"p":0.3,"tr":["A"]},{"cont":["b"],"p":0.5,"tr":["B"]}]})",
                      "application/json");
    });
    server_.Post("/over", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"items":[{"cont":["a"],"p":0.6,"tr":["A"]},{"cont":["b"],"p":0.6,"tr":["B"]}]})",
                      "application/json");
    });
    server_.Post("/slow", [](const httplib::Request&, httplib::Response& res) {
      std::this_thread::sleep_for(600ms);
      res.set_content(R"({"items":[]})", "application/json");
    });
    server_.Post("/garbage", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("{\"items\": 3}", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

  nlohmann::json last_request;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_CASE("scripted backend returns the golden set") {
  const ScriptedPredictor pred(ScriptedFixture::parse(slurp(SPECINTERP_FIXTURES "/golden/predictions.json")));
  const ContextDoc& ctx = *pred.fixture().find_context("golden");
  const auto ps = pred.predict(ctx, kGoldenPrefix, 4);
  REQUIRE(ps);
  REQUIRE(ps->items.size() == 3);
  CHECK(ps->items[0].continuation == Tokens{"映画", "を", "見", "に", "行った"});
  CHECK(ps->items[0].p == doctest::Approx(0.4));
  CHECK(ps->items[1].p == doctest::Approx(0.3));
  CHECK(ps->items[2].p == doctest::Approx(0.2));
  CHECK(ps->other_mass == doctest::Approx(0.1));
  CHECK(ps->prefix_len == 5);
  CHECK(validate_prediction_set(*ps, 4).empty());

  CHECK_FALSE(pred.predict(ctx, Tokens{"私は"}, 4));
  CHECK_FALSE(pred.predict(ContextDoc{"other", {}}, kGoldenPrefix, 4));
  const auto top = pred.predict(ctx, kGoldenPrefix, 1);
  REQUIRE(top);
  CHECK(top->items.size() == 1);
  CHECK(top->other_mass == doctest::Approx(0.6));
}

TEST_CASE("fixture validation lists every problem") {
  const auto problems = ScriptedFixture::validate(R"({
    "contexts": [{"id": "c"}],
    "predictions": [
      {"context": "c", "prefix": [], "items": [{"cont": ["a"], "p": 0.7, "tr": []}, {"cont": ["b"], "p": 0.5, "tr": []}]},
      {"context": "zz", "prefix": [], "items": [{"cont": [], "p": 1.5, "tr": []}]}
    ]})");
  auto count = [&](const std::string& needle) {
    return std::count_if(problems.begin(), problems.end(),
                         [&](const std::string& p) { return p.find(needle) != std::string::npos; });
  };
  // The second entry's 1.5 breaks both the per-item range and the sum.
  CHECK(problems.size() == 5);
  CHECK(count("sum of p") == 2);
  CHECK(count("unknown context") == 1);
  CHECK(count("empty continuation") == 1);
  CHECK_THROWS_AS(ScriptedFixture::parse("{}"), Error);
  CHECK(ScriptedFixture::validate(slurp(SPECINTERP_FIXTURES "/golden/predictions.json")).empty());
}

TEST_CASE("n-gram backend translates its hypotheses") {
  auto model = std::make_shared<const NgramModel>(NgramModel::train(std::vector<Tokens>{{"a", "b"}, {"a", "c"}}, 2));
  auto table = std::make_shared<const PhraseTable>(
      std::vector<PhraseEntry>{{{"a", "b"}, {"AB"}, false}, {{"c"}, {"C"}, false}});
  const NgramPredictor pred(model, table, 3);
  const auto ps = pred.predict(ContextDoc{}, Tokens{"a"}, 2);
  REQUIRE(ps);
  REQUIRE(ps->items.size() == 2);
  CHECK(ps->items[0].continuation == Tokens{"b"});
  CHECK(ps->items[0].translation == Tokens{"AB"});
  CHECK(ps->items[1].translation == Tokens{"a", "C"});
  CHECK(ps->items[0].p == ngram_continuations(*model, Tokens{"a"}, 2, 3).items[0].p);

  // Open hypotheses only carry the stable part of their translation.
  const auto open = pred.predict(ContextDoc{}, Tokens{}, 4);
  REQUIRE(open);
  for (const auto& it : open->items) {
    if (!it.complete) CHECK(it.translation == table->translate_stable(it.continuation).target);
  }
  CHECK(pred.perplexity(Tokens{"a", "b"}));
  const NgramPredictor bare(model, nullptr, 3);
  CHECK(bare.predict(ContextDoc{}, Tokens{"a"}, 1)->items[0].translation == Tokens{"a", "b"});
}

TEST_CASE("remote backend") {
  FakeServer server;
  const ContextDoc ctx{"ctx", {}};

  SUBCASE("well-formed response") {
    const RemotePredictor pred(server.endpoint(), 2000ms);
    const auto ps = pred.predict(ctx, Tokens{"x", "y"}, 4, Tokens{"w"});
    REQUIRE(ps);
    REQUIRE(ps->items.size() == 2);
    CHECK(ps->items[0].continuation == Tokens{"b"});
    CHECK(ps->other_mass == doctest::Approx(0.2));
    CHECK(ps->prefix_len == 2);
    CHECK(server.last_request["context_id"] == "ctx");
    CHECK(server.last_request["k"] == 4);
    CHECK(server.last_request["prefix"] == nlohmann::json::array({"x", "y"}));
    CHECK(server.last_request["aux"] == nlohmann::json::array({"w"}));
  }
  SUBCASE("overshooting probabilities are rescaled") {
    const RemotePredictor pred(server.endpoint(), 2000ms, "/over");
    const auto ps = pred.predict(ctx, Tokens{}, 4);
    REQUIRE(ps);
    CHECK(ps->items[0].p + ps->items[1].p == doctest::Approx(1.0));
    CHECK(ps->other_mass == 0.0);
    CHECK(validate_prediction_set(*ps).empty());
  }
  SUBCASE("timeout") {
    const RemotePredictor pred(server.endpoint(), 100ms, "/slow");
    CHECK_FALSE(pred.predict(ctx, Tokens{}, 4));
    try {
      pred.request(ctx, Tokens{}, 4);
      FAIL("expected a timeout");
    } catch (const RemoteError& e) {
      CHECK(e.failure() == RemoteFailure::Timeout);
    }
  }
  SUBCASE("malformed response") {
    const RemotePredictor pred(server.endpoint(), 2000ms, "/garbage");
    try {
      pred.request(ctx, Tokens{}, 4);
      FAIL("expected a malformed response");
    } catch (const RemoteError& e) {
      CHECK(e.failure() == RemoteFailure::MalformedResponse);
    }
  }
  SUBCASE("unreachable") {
    const RemotePredictor pred("http://127.0.0.1:1", 500ms);
    CHECK_FALSE(pred.predict(ctx, Tokens{}, 4));
  }
}

TEST_CASE("parse_remote_response truncates to k") {
  const auto ps = parse_remote_response(
      R"({"items":[{"cont":["a"],"p":0.1,"tr":[]},{"cont":["b"],"p":0.2,"tr":[]},{"cont":["c"],"p":0.3,"tr":[]}]})", 2, 0);
  REQUIRE(ps.items.size() == 2);
  CHECK(ps.items[0].continuation == Tokens{"c"});
  CHECK(ps.other_mass == doctest::Approx(0.5));
  CHECK_THROWS_AS(parse_remote_response("[]", 2, 0), RemoteError);
  CHECK_THROWS_AS(parse_remote_response(R"({"items":[{"cont":["a"],"p":0,"tr":[]}]})", 2, 0), RemoteError);
}
