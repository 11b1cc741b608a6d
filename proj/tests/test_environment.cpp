#include <cmath>

#include "catch2/catch_amalgamated.hpp"
#include "rlminer/environment.hpp"
#include "support/fixtures.hpp"
#include "support/reference.hpp"

using namespace rlminer;

namespace {

// Bit-vector over db.m() with the given external ids set.
BitVector bits_of(const TransactionDatabase& db, std::initializer_list<int> ext) {
  BitVector b(db.m());
  for (int e : ext) b.set(*db.internal_id(e), true);
  return b;
}

StepOutcome flip_to(const TransactionDatabase& db, const MeasureConfig& cfg,
                    const BitVector& prev, Item flip, PatternSet& episode) {
  BitVector next = prev;
  next.flip(flip);
  return compute_reward(prev, next, flip, db, cfg, episode);
}

}  // namespace

TEST_CASE("reward cases on the example database", "[environment]") {
  const auto db = testsupport::fig2_db();
  const auto cfg = MeasureConfig::fi(5);
  PatternSet episode;

  SECTION("nonexistent itemset scores -1") {
    const auto out = flip_to(db, cfg, bits_of(db, {2, 3}), *db.internal_id(4), episode);
    CHECK(out.reward == -1);
    CHECK_FALSE(out.extracted.has_value());
    CHECK(out.measure_value == 0);
  }

  SECTION("empty itemset scores -1") {
    const auto out = flip_to(db, cfg, bits_of(db, {3}), *db.internal_id(3), episode);
    CHECK(out.reward == -1);
  }

  SECTION("support below a quarter of the threshold scores 0") {
    const auto out = flip_to(db, cfg, bits_of(db, {2, 3}), *db.internal_id(5), episode);
    CHECK(out.reward == 0);  // sup({2,3,5}) = 1, 4*1 < 5
    CHECK(out.measure_value == 1);
  }

  SECTION("support in the second bracket scores 1") {
    const auto out = flip_to(db, cfg, bits_of(db, {1, 2}), *db.internal_id(3), episode);
    CHECK(out.reward == 1);  // sup({1,2,3}) = 2
  }

  SECTION("support in the third bracket scores 2") {
    const auto out = flip_to(db, cfg, bits_of(db, {3, 5}), *db.internal_id(5), episode);
    CHECK(out.reward == 2);  // sup({3}) = 3 in [5/2, 15/4)
  }

  SECTION("qualifying itemset scores 100 once, then 4 within the episode") {
    const auto prev = bits_of(db, {2, 4});
    const auto first = flip_to(db, cfg, prev, *db.internal_id(4), episode);
    CHECK(first.reward == 100);  // sup({2}) = 6 >= 5
    REQUIRE(first.extracted.has_value());
    CHECK(first.extracted->items == std::vector<Item>{*db.internal_id(2)});
    CHECK_FALSE(first.extracted->is_rule());
    CHECK(first.measure_value == 6);

    const auto again = flip_to(db, cfg, prev, *db.internal_id(4), episode);
    CHECK(again.reward == 4);  // repeat within the episode
    CHECK(again.extracted.has_value());

    PatternSet fresh;
    const auto new_episode = flip_to(db, cfg, prev, *db.internal_id(4), fresh);
    CHECK(new_episode.reward == 100);  // novelty is per episode
  }
}

TEST_CASE("bracket boundaries land in the higher case", "[environment]") {
  const auto db = testsupport::boundary_db();
  const auto cfg = MeasureConfig::fi(8);
  PatternSet episode;
  // Singleton supports 1, 2, 4, 6, 8: exactly xi/8, xi/4, xi/2, 3xi/4, xi.
  const int expected[] = {0, 1, 2, 3, 100};
  for (int e = 1; e <= 5; ++e) {
    BitVector prev(db.m());
    BitVector next = prev;
    const Item i = *db.internal_id(e);
    next.set(i, true);
    const auto out = compute_reward(prev, next, i, db, cfg, episode);
    INFO("item " << e << " support " << db.item_support(i));
    CHECK(out.reward == expected[e - 1]);
  }
}

TEST_CASE("utility rewards use the same brackets", "[environment]") {
  const auto db = testsupport::small_utility_db();
  const auto cfg = MeasureConfig::hui(15);
  PatternSet episode;

  auto out = flip_to(db, cfg, bits_of(db, {1}), *db.internal_id(2), episode);
  CHECK(out.reward == 100);  // utility({1,2}) = 15, exactly xi
  CHECK(out.measure_value == 15);

  out = flip_to(db, cfg, bits_of(db, {1}), *db.internal_id(3), episode);
  CHECK(out.reward == 2);  // utility({1,3}) = 11 in [7.5, 11.25)

  out = flip_to(db, cfg, bits_of(db, {1, 3}), *db.internal_id(1), episode);
  CHECK(out.reward == 1);  // utility({3}) = 6 in [3.75, 7.5)
}

TEST_CASE("rule rewards read the rule off the edit direction", "[environment]") {
  const auto db = testsupport::fig2_db();
  const Item i1 = *db.internal_id(1), i2 = *db.internal_id(2),
             i3 = *db.internal_id(3), i4 = *db.internal_id(4),
             i5 = *db.internal_id(5);

  SECTION("adding an item makes it the consequent") {
    const auto cfg = MeasureConfig::ar(2, parse_percent("80"));
    PatternSet episode;
    const auto out = flip_to(db, cfg, bits_of(db, {1}), i2, episode);
    CHECK(out.reward == 100);  // {1} => 2: sup 5 >= 2, conf 1.0 >= 0.8
    REQUIRE(out.extracted.has_value());
    CHECK(out.extracted->items == std::vector<Item>{i1});
    CHECK(out.extracted->consequent == i2);
    CHECK(out.measure_value == 5);
    CHECK(out.confidence == Catch::Approx(1.0));

    // Removing item 2 from {1,2} induces the same rule: repeat -> 4.
    const auto back = flip_to(db, cfg, bits_of(db, {1, 2}), i2, episode);
    CHECK(back.reward == 4);
    CHECK(back.extracted.has_value());

    PatternSet fresh;
    const auto removed = flip_to(db, cfg, bits_of(db, {1, 2}), i2, fresh);
    CHECK(removed.reward == 100);
    REQUIRE(removed.extracted.has_value());
    CHECK(removed.extracted->items == std::vector<Item>{i1});
    CHECK(removed.extracted->consequent == i2);
  }

  SECTION("support passes but confidence fails: 4 without extraction") {
    const auto cfg = MeasureConfig::ar(2, parse_percent("90"));
    PatternSet episode;
    const auto out = flip_to(db, cfg, bits_of(db, {2}), i1, episode);
    CHECK(out.reward == 4);  // {2} => 1: conf 5/6 < 0.9
    CHECK_FALSE(out.extracted.has_value());
    CHECK(out.confidence == Catch::Approx(5.0 / 6.0));
  }

  SECTION("union support below threshold falls into the brackets") {
    const auto cfg = MeasureConfig::ar(5, parse_percent("80"));
    PatternSet episode;
    const auto out = flip_to(db, cfg, bits_of(db, {3}), i5, episode);
    CHECK(out.reward == 1);  // sup({3,5}) = 2 in [5/4, 5/2)
    CHECK_FALSE(out.extracted.has_value());
  }

  SECTION("empty antecedent scores -1") {
    const auto cfg = MeasureConfig::ar(2, parse_percent("80"));
    PatternSet episode;
    BitVector empty(db.m());
    const auto out = flip_to(db, cfg, empty, i2, episode);
    CHECK(out.reward == -1);
  }

  SECTION("nonexistent result scores -1 before any rule is read") {
    const auto cfg = MeasureConfig::ar(2, parse_percent("80"));
    PatternSet episode;
    const auto out = flip_to(db, cfg, bits_of(db, {2, 3}), i4, episode);
    CHECK(out.reward == -1);
  }

  SECTION("reinitialization is scored on its own support and never extracts") {
    const auto cfg = MeasureConfig::ar(8, parse_percent("80"));
    PatternSet episode;
    const BitVector prev = bits_of(db, {3});
    const BitVector next = bits_of(db, {1, 2});
    const auto out = compute_reward(prev, next, db.m(), db, cfg, episode);
    CHECK(out.reward == 2);  // sup({1,2}) = 5 in [4, 6)
    CHECK_FALSE(out.extracted.has_value());

    const auto cfg_low = MeasureConfig::ar(2, parse_percent("80"));
    const auto qualifying = compute_reward(prev, next, db.m(), db, cfg_low, episode);
    CHECK(qualifying.reward == 4);  // meets the support threshold: capped at 4
    CHECK_FALSE(qualifying.extracted.has_value());
  }
}

TEST_CASE("random initialization returns existing nonempty itemsets",
          "[environment]") {
  const auto db = testsupport::fig2_db();
  Rng rng(42);
  int on_count_item2 = 0;
  for (int round = 0; round < 500; ++round) {
    const BitVector b = random_initialize(db, rng);
    const auto items = b.items();
    REQUIRE_FALSE(items.empty());
    REQUIRE(testsupport::scan_support(db, items) >= 1);
    if (b.test(*db.internal_id(2))) ++on_count_item2;
  }
  // Item 2 appears in 6/7 transactions; conditioning on existence keeps its
  // inclusion rate high.
  CHECK(on_count_item2 > 300);

  Rng a(7), b(7);
  CHECK(random_initialize(db, a) == random_initialize(db, b));
}

TEST_CASE("actions flip one bit or redraw", "[environment]") {
  const auto db = testsupport::fig2_db();
  const BitVector prev = bits_of(db, {1, 2});
  Rng rng(3);
  const BitVector flipped = apply_action(prev, *db.internal_id(3), db, rng);
  CHECK(flipped.test(*db.internal_id(3)));
  CHECK(flipped.count() == 3);
  CHECK_FALSE(is_reinitialize(*db.internal_id(3), db.m()));
  CHECK(is_reinitialize(db.m(), db.m()));

  Rng r1(9), r2(9);
  const BitVector redraw = apply_action(prev, db.m(), db, r1);
  CHECK(redraw == random_initialize(db, r2));
}

TEST_CASE("state values match a brute-force evaluation", "[environment]") {
  const auto db = testsupport::fig2_db();

  SECTION("frequent-itemset state") {
    const auto cfg = MeasureConfig::fi(5);
    for (const auto& base : {bits_of(db, {2}), bits_of(db, {1, 2, 3})}) {
      const auto got = compute_state(base, db, cfg);
      const auto want = testsupport::brute_state(base, db, cfg);
      REQUIRE(got.size() == static_cast<std::size_t>(db.m()));
      for (std::size_t i = 0; i < got.size(); ++i) {
        INFO("dimension " << i);
        REQUIRE_THAT(got[i], Catch::Matchers::WithinRel(want[i], 1e-12) ||
                                 Catch::Matchers::WithinAbs(want[i], 1e-15));
      }
    }
    // One hand value: removing 1 from {1,2} leaves {2} with support 6.
    const auto s = compute_state(bits_of(db, {1, 2}), db, cfg);
    CHECK_THAT(s[static_cast<std::size_t>(*db.internal_id(1))],
               Catch::Matchers::WithinRel(std::log(6.0 / 7.0 + 1.0), 1e-12));
  }

  SECTION("rule state has support and confidence halves") {
    const auto cfg = MeasureConfig::ar(2, parse_percent("80"));
    for (const auto& base : {bits_of(db, {2}), bits_of(db, {1, 3}), BitVector(db.m())}) {
      const auto got = compute_state(base, db, cfg);
      const auto want = testsupport::brute_state(base, db, cfg);
      REQUIRE(got.size() == 2 * static_cast<std::size_t>(db.m()));
      for (std::size_t i = 0; i < got.size(); ++i) {
        INFO("dimension " << i);
        REQUIRE_THAT(got[i], Catch::Matchers::WithinRel(want[i], 1e-12) ||
                                 Catch::Matchers::WithinAbs(want[i], 1e-15));
      }
    }
  }

  SECTION("utility state") {
    const auto udb = testsupport::small_utility_db();
    const auto cfg = MeasureConfig::hui(15);
    for (const auto& base : {bits_of(udb, {2}), bits_of(udb, {1, 3})}) {
      const auto got = compute_state(base, udb, cfg);
      const auto want = testsupport::brute_state(base, udb, cfg);
      for (std::size_t i = 0; i < got.size(); ++i) {
        INFO("dimension " << i);
        REQUIRE_THAT(got[i], Catch::Matchers::WithinRel(want[i], 1e-12) ||
                                 Catch::Matchers::WithinAbs(want[i], 1e-15));
      }
    }
  }

  SECTION("random bases agree too") {
    Rng rng(21);
    const auto cfg_fi = MeasureConfig::fi(2);
    for (int round = 0; round < 30; ++round) {
      const auto rdb = testsupport::random_db(rng, 7, 15, false);
      BitVector base(rdb.m());
      for (Item i = 0; i < rdb.m(); ++i) base.set(i, rng.bernoulli(0.4));
      const auto got = compute_state(base, rdb, cfg_fi);
      const auto want = testsupport::brute_state(base, rdb, cfg_fi);
      for (std::size_t i = 0; i < got.size(); ++i)
        REQUIRE_THAT(got[i], Catch::Matchers::WithinRel(want[i], 1e-12) ||
                                 Catch::Matchers::WithinAbs(want[i], 1e-15));
    }
  }
}

TEST_CASE("extended state appends a scaled mean", "[environment]") {
  const std::vector<double> s{0.1, 0.2, 0.6};
  const auto fi = extend_state(s, Task::kFi);
  REQUIRE(fi.size() == 4);
  CHECK(fi[0] == 0.1);
  CHECK(fi[3] == Catch::Approx(0.02 * 0.3));

  const std::vector<double> ar{0.1, 0.2, 0.6, 9.0, 9.0, 9.0};
  const auto ar_ext = extend_state(ar, Task::kAr);
  REQUIRE(ar_ext.size() == 4);  // support half only
  CHECK(ar_ext[2] == 0.6);
  CHECK(ar_ext[3] == Catch::Approx(0.02 * 0.3));
}
