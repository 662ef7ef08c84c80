#include <doctest.h>

#include <json.hpp>

#include "specinterp/error.hpp"
#include "specinterp/metrics.hpp"

using namespace si;

TEST_CASE("average lagging examples") {
  const std::vector<std::size_t> all_at_end{3, 3, 3};
  CHECK(average_lagging(all_at_end, 3) == doctest::Approx(3.0));
  const std::vector<std::size_t> diagonal{1, 2, 3};
  CHECK(average_lagging(diagonal, 3) == doctest::Approx(1.0));
  CHECK(wait_until_end_al(3, 3) == doctest::Approx(3.0));
  CHECK(per_token_al(3, 3) == doctest::Approx(1.0));
  // tau stops at the first token emitted after the whole source.
  const std::vector<std::size_t> g{2, 4, 4, 4};
  CHECK(average_lagging(g, 4) == doctest::Approx((2.0 + 3.0) / 2.0));
  // Golden-run shape: 3 tokens at 5, 5 tokens at 6, source 8.
  const std::vector<std::size_t> golden{5, 5, 5, 6, 6, 6, 6, 6};
  CHECK(average_lagging(golden, 8) < wait_until_end_al(8, 8));
}

TEST_CASE("average lagging rejects empty input") {
  try {
    average_lagging({}, 3);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyEmission);
  }
  const std::vector<std::size_t> g{1};
  CHECK_THROWS_AS(average_lagging(g, 0), Error);
}

TEST_CASE("edit distance and accuracy") {
  const Tokens a{"a", "b", "c"}, b{"a", "x", "c", "d"};
  CHECK(edit_distance(a, b) == 2);
  CHECK(edit_distance(a, a) == 0);
  CHECK(edit_distance({}, a) == 3);
  CHECK(accuracy(a, a) == 1.0);
  CHECK(accuracy(a, b) == doctest::Approx(0.5));
  CHECK(accuracy({}, {}) == 1.0);
  CHECK(accuracy({}, a) == 0.0);
}

TEST_CASE("report from a record") {
  RunRecord r;
  r.emitted = {"Yesterday", ",", "I", "went", "shopping", "with", "my", "friend"};
  r.emission_src = {5, 5, 5, 6, 6, 6, 6, 6};
  r.source_len = 8;
  r.hits = 2;
  r.divergences = 1;
  r.reference = r.emitted;
  const auto rep = compute_report(r);
  REQUIRE(rep.al.has_value());
  CHECK(*rep.al == doctest::Approx(average_lagging(r.emission_src, 8)));
  CHECK(rep.hit_rate == doctest::Approx(0.25));
  CHECK(rep.accuracy == 1.0);
  CHECK(rep.divergences == 1);
  CHECK(rep.al_wait_until_end == doctest::Approx(8.0));

  const auto j = nlohmann::json::parse(report_json(rep));
  CHECK(j["hit_rate"] == 0.25);
  CHECK(j["divergences"] == 1);
  CHECK(j["conflicts"] == 0);
  CHECK(j["catchups"] == 0);
  CHECK(j["accuracy"] == 1.0);

  RunRecord silent;
  silent.source_len = 2;
  const auto s = compute_report(silent);
  CHECK_FALSE(s.al.has_value());
  CHECK_FALSE(s.accuracy.has_value());
  const auto js = nlohmann::json::parse(report_json(s));
  CHECK(js["al"].is_null());
  CHECK(js["accuracy"].is_null());
}
