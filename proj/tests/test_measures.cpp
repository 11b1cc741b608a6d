#include "catch2/catch_amalgamated.hpp"
#include "rlminer/measures.hpp"
#include "rlminer/rng.hpp"
#include "support/fixtures.hpp"
#include "support/reference.hpp"

using namespace rlminer;

TEST_CASE("support matches hand counts on the example database", "[measures]") {
  const auto db = testsupport::fig2_db();
  const Item i1 = *db.internal_id(1), i2 = *db.internal_id(2),
             i3 = *db.internal_id(3), i4 = *db.internal_id(4),
             i5 = *db.internal_id(5);
  CHECK(support(db, std::vector<Item>{i2}) == 6);
  CHECK(support(db, std::vector<Item>{std::min(i1, i2), std::max(i1, i2)}) == 5);
  std::vector<Item> v123{i1, i2, i3};
  std::sort(v123.begin(), v123.end());
  CHECK(support(db, v123) == 2);
  std::vector<Item> v234{i2, i3, i4};
  std::sort(v234.begin(), v234.end());
  CHECK(support(db, v234) == 0);
  CHECK_FALSE(exists_in(db, v234));
  std::vector<Item> v235{i2, i3, i5};
  std::sort(v235.begin(), v235.end());
  CHECK(support(db, v235) == 1);
  CHECK(support(db, std::vector<Item>{}) == 7);
}

TEST_CASE("support agrees with a transaction scan on random databases",
          "[measures]") {
  Rng rng(7);
  for (int round = 0; round < 50; ++round) {
    const auto db = testsupport::random_db(rng, 8, 20, false);
    for (unsigned mask = 1; mask < (1u << db.m()); ++mask) {
      const auto items = testsupport::mask_to_items(mask);
      REQUIRE(support(db, items) == testsupport::scan_support(db, items));
    }
  }
}

TEST_CASE("utility matches hand values and a transaction scan", "[measures]") {
  const auto db = testsupport::small_utility_db();
  const Item i1 = *db.internal_id(1), i2 = *db.internal_id(2),
             i3 = *db.internal_id(3);
  auto sorted = [](std::vector<Item> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  CHECK(utility(db, sorted({i1})) == 7);
  CHECK(utility(db, sorted({i2})) == 22);
  CHECK(utility(db, sorted({i3})) == 6);
  CHECK(utility(db, sorted({i1, i2})) == 15);
  CHECK(utility(db, sorted({i1, i3})) == 11);
  CHECK(utility(db, sorted({i2, i3})) == 17);
  CHECK(utility(db, sorted({i1, i2, i3})) == 16);
  CHECK(utility(db, std::vector<Item>{}) == 0);

  Rng rng(11);
  for (int round = 0; round < 50; ++round) {
    const auto rdb = testsupport::random_db(rng, 8, 20, true);
    for (unsigned mask = 1; mask < (1u << rdb.m()); ++mask) {
      const auto items = testsupport::mask_to_items(mask);
      REQUIRE(utility(rdb, items) == testsupport::scan_utility(rdb, items));
    }
  }
}

TEST_CASE("utility requires a utility-mode database", "[measures]") {
  const auto db = testsupport::fig2_db();
  CHECK_THROWS_AS(utility(db, std::vector<Item>{0}), std::logic_error);
}

TEST_CASE("confidence is a support ratio with an undefined flag", "[measures]") {
  const auto db = testsupport::fig2_db();
  const Item i1 = *db.internal_id(1), i2 = *db.internal_id(2),
             i3 = *db.internal_id(3), i4 = *db.internal_id(4),
             i5 = *db.internal_id(5);
  auto c = confidence(db, std::vector<Item>{i1}, i2);
  CHECK_FALSE(c.undefined);
  CHECK(c.value == Catch::Approx(1.0));
  c = confidence(db, std::vector<Item>{i2}, i1);
  CHECK(c.value == Catch::Approx(5.0 / 6.0));
  c = confidence(db, std::vector<Item>{i3}, i5);
  CHECK(c.value == Catch::Approx(2.0 / 3.0));
  // {4,5} never co-occurs, so a rule conditioned on it is undefined.
  std::vector<Item> v45{i4, i5};
  std::sort(v45.begin(), v45.end());
  c = confidence(db, v45, i1);
  CHECK(c.undefined);
  CHECK(c.value == 0.0);
  CHECK_THROWS_WITH(confidence(db, std::vector<Item>{i2}, i2),
                    Catch::Matchers::ContainsSubstring("overlaps"));
}

TEST_CASE("confidence thresholds compare exactly at boundaries", "[measures]") {
  // 5/6 against 83.3% and 83.4%: 5*1000 = 5000 vs 833*6 = 4998 and 834*6 = 5004.
  const auto pass = MeasureConfig::ar(1, parse_percent("83.3"));
  const auto fail = MeasureConfig::ar(1, parse_percent("83.4"));
  CHECK(pass.confidence_at_least(5, 6));
  CHECK_FALSE(fail.confidence_at_least(5, 6));
  // Exact boundary 4/5 against 80%.
  const auto edge = MeasureConfig::ar(1, parse_percent("80"));
  CHECK(edge.confidence_at_least(4, 5));
  CHECK_FALSE(edge.confidence_at_least(3, 5));
  // Zero antecedent support never passes.
  CHECK_FALSE(edge.confidence_at_least(0, 0));
}

TEST_CASE("normalization factor picks the task's ceiling", "[measures]") {
  const auto fi = testsupport::fig2_db();
  CHECK(normalization_factor(fi, Task::kFi) == 7.0);
  CHECK(normalization_factor(fi, Task::kAr) == 7.0);
  const auto hui = testsupport::small_utility_db();
  CHECK(normalization_factor(hui, Task::kHui) == 35.0);
}
