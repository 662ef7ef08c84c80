#include <doctest.h>

#include "specinterp/prediction.hpp"

using namespace si;

TEST_CASE("prediction sets are ranked, truncated and carry the residual") {
  std::vector<Prediction> items{
      {{"b"}, 0.2, {}, true},
      {{"a"}, 0.2, {}, true},
      {{"c"}, 0.5, {}, true},
      {{"a"}, 0.2, {}, false},
  };
  const auto ps = make_prediction_set(items, 3, 7);
  REQUIRE(ps.items.size() == 3);
  CHECK(ps.items[0].continuation == Tokens{"c"});
  // Open [a] ranks before complete [a </s>]; both before [b </s>].
  CHECK(ps.items[1].continuation == Tokens{"a"});
  CHECK_FALSE(ps.items[1].complete);
  CHECK(ps.items[2].continuation == Tokens{"a"});
  CHECK(ps.other_mass == doctest::Approx(0.1));
  CHECK(ps.prefix_len == 7);
  CHECK(validate_prediction_set(ps, 3).empty());
}

TEST_CASE("validation reports every violation") {
  PredictionSet ps;
  ps.items = {{{"a"}, 0.7, {}, true}, {{"b"}, 0.5, {}, true}, {{}, 0.0, {}, true}};
  ps.other_mass = 1.0 - 1.2;
  const auto v = validate_prediction_set(ps, 2);
  bool sum = false;
  for (const auto& s : v) sum = sum || s.rfind("sum of p exceeds 1", 0) == 0;
  CHECK(sum);
  CHECK(v.size() >= 4);
  CHECK(validate_prediction_set(no_prediction()).empty());
  CHECK(no_prediction(3).other_mass == 1.0);
}
