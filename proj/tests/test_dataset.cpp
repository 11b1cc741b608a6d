#include <sstream>

#include "catch2/catch_amalgamated.hpp"
#include "rlminer/dataset.hpp"
#include "support/fixtures.hpp"

using namespace rlminer;

TEST_CASE("plain loader reads the bundled example database", "[dataset]") {
  const auto db = TransactionDatabase::load_plain_file(testsupport::data_dir() +
                                                       "/fig2.txt");
  REQUIRE(db.n() == 7);
  REQUIRE(db.m() == 5);
  REQUIRE_FALSE(db.utility_mode());
  // First-occurrence order assigns internal ids 0..4 to external 1,2,3,5,4.
  CHECK(db.external_id(0) == 1);
  CHECK(db.external_id(1) == 2);
  CHECK(db.external_id(2) == 3);
  CHECK(db.external_id(3) == 5);
  CHECK(db.external_id(4) == 4);
  CHECK(db.item_support(*db.internal_id(1)) == 5);
  CHECK(db.item_support(*db.internal_id(2)) == 6);
  CHECK(db.item_support(*db.internal_id(3)) == 3);
  CHECK(db.item_support(*db.internal_id(4)) == 1);
  CHECK(db.item_support(*db.internal_id(5)) == 2);
  CHECK_FALSE(db.internal_id(6).has_value());
  CHECK(db.total_utility() == 0);
  const auto stats = db.stats();
  CHECK(stats.transaction_count == 7);
  CHECK(stats.item_count == 5);
  CHECK(stats.avg_transaction_len == Catch::Approx(17.0 / 7.0));
}

TEST_CASE("plain loader normalizes lines", "[dataset]") {
  std::istringstream in("3 3 7\n\n  \n7 3\r\n");
  const auto db = TransactionDatabase::load_plain(in);
  REQUIRE(db.n() == 2);
  REQUIRE(db.m() == 2);
  CHECK(db.transaction(0).size() == 2);  // duplicate 3 dropped
  CHECK(db.item_support(*db.internal_id(3)) == 2);
  CHECK(db.item_support(*db.internal_id(7)) == 2);
}

TEST_CASE("plain loader rejects malformed input", "[dataset]") {
  auto load = [](const char* text) {
    std::istringstream in(text);
    return TransactionDatabase::load_plain(in);
  };
  CHECK_THROWS_WITH(load("1 -2\n"), Catch::Matchers::ContainsSubstring("line 1"));
  CHECK_THROWS_WITH(load("1 2\n3 x\n"), Catch::Matchers::ContainsSubstring("line 2"));
  CHECK_THROWS_WITH(load(""), Catch::Matchers::ContainsSubstring("no transactions"));
}

TEST_CASE("utility loader parses and validates", "[dataset]") {
  std::istringstream in(
      "1 2 3:16:5 10 1\n"
      "2 3:6:4 2\n"
      "1 3:5:2 3\n"
      "2:8:8\n");
  const auto db = TransactionDatabase::load_utility(in);
  REQUIRE(db.utility_mode());
  REQUIRE(db.n() == 4);
  REQUIRE(db.m() == 3);
  CHECK(db.total_utility() == 35);
  CHECK(db.transaction_utility(0) == 16);
  CHECK(db.item_twu(*db.internal_id(1)) == 21);
  CHECK(db.item_twu(*db.internal_id(2)) == 30);
  CHECK(db.item_twu(*db.internal_id(3)) == 27);

  // Round trip through the serializer.
  std::ostringstream out;
  db.serialize_utility(out);
  std::istringstream again(out.str());
  const auto db2 = TransactionDatabase::load_utility(again);
  CHECK(db2.n() == db.n());
  CHECK(db2.total_utility() == db.total_utility());
}

TEST_CASE("utility loader rejects malformed input", "[dataset]") {
  auto load = [](const char* text) {
    std::istringstream in(text);
    return TransactionDatabase::load_utility(in);
  };
  CHECK_THROWS_WITH(load("1 2:7:5 1\n"),
                    Catch::Matchers::ContainsSubstring("does not equal the sum"));
  CHECK_THROWS_WITH(load("1 2:6:6\n"),
                    Catch::Matchers::ContainsSubstring("does not match"));
  CHECK_THROWS_WITH(load("1 2 6\n"),
                    Catch::Matchers::ContainsSubstring("':' separators"));
  CHECK_THROWS_WITH(load("1 2:6:3 3:9\n"),
                    Catch::Matchers::ContainsSubstring("too many"));
  CHECK_THROWS_WITH(load("1 1:6:3 3\n"),
                    Catch::Matchers::ContainsSubstring("duplicate item"));
  CHECK_THROWS_WITH(load("1 2:4:5 -1\n"),
                    Catch::Matchers::ContainsSubstring("negative item utility"));
  CHECK_THROWS_WITH(load("1 2:x:3 3\n"),
                    Catch::Matchers::ContainsSubstring("transaction utility"));
}

TEST_CASE("percent strings parse as exact decimals", "[dataset]") {
  auto p = parse_percent("71.4");
  CHECK(p.num == 714);
  CHECK(p.den == 10);
  p = parse_percent("5");
  CHECK(p.num == 5);
  CHECK(p.den == 1);
  p = parse_percent("0.05");
  CHECK(p.num == 5);
  CHECK(p.den == 100);
  CHECK_THROWS(parse_percent(""));
  CHECK_THROWS(parse_percent("1.2.3"));
  CHECK_THROWS(parse_percent("12%"));
  CHECK_THROWS(parse_percent("-3"));
  CHECK_THROWS(parse_percent("."));
}

TEST_CASE("absolute thresholds round up exactly", "[dataset]") {
  // 71.4% of 7 transactions: 4.998 -> 5. A float computation of
  // 0.714 * 7 = 4.9979... would also ceil to 5, but 71.4% of 1000
  // must be exactly 714, not 715 from a 714.0000001 artifact.
  CHECK(absolute_threshold(7, parse_percent("71.4")) == 5);
  CHECK(absolute_threshold(1000, parse_percent("71.4")) == 714);
  CHECK(absolute_threshold(100, parse_percent("2")) == 2);
  CHECK(absolute_threshold(3, parse_percent("1")) == 1);
  CHECK(absolute_threshold(8124, parse_percent("35")) == 2844);  // ceil(2843.4)
  CHECK(absolute_threshold(0, parse_percent("50")) == 0);
}

TEST_CASE("item pruning drops weak items and empty transactions", "[dataset]") {
  const auto db = testsupport::fig2_db();
  const auto pruned = prune_items(db, Task::kFi, 5);
  REQUIRE(pruned.db.m() == 2);
  REQUIRE(pruned.db.n() == 6);  // {3,5} becomes empty and is dropped
  CHECK(pruned.db.external_id(0) == 1);
  CHECK(pruned.db.external_id(1) == 2);
  CHECK(pruned.db.item_support(0) == 5);
  CHECK(pruned.db.item_support(1) == 6);
  // kept maps the new internal ids back to the source's internal ids.
  CHECK(pruned.kept[0] == *db.internal_id(1));
  CHECK(pruned.kept[1] == *db.internal_id(2));
  CHECK_THROWS_WITH(prune_items(db, Task::kFi, 100),
                    Catch::Matchers::ContainsSubstring("lower it"));
}

TEST_CASE("utility pruning uses transaction-weighted utility", "[dataset]") {
  const auto db = testsupport::small_utility_db();
  // TWU: 1->21, 2->30, 3->27. Threshold 25 keeps items 2 and 3.
  const auto pruned = prune_items(db, Task::kHui, 25);
  REQUIRE(pruned.db.m() == 2);
  CHECK(pruned.db.external_id(0) == 2);
  CHECK(pruned.db.external_id(1) == 3);
  CHECK(pruned.db.n() == 4);  // no transaction loses its last item
  CHECK(pruned.db.utility_mode());
}

TEST_CASE("source/target split cuts at floor(fraction * n)", "[dataset]") {
  const auto db = testsupport::fig2_db();
  const auto [src, tgt] = split_source_target(db, 0.6);
  CHECK(src.n() == 4);  // floor(4.2)
  CHECK(tgt.n() == 3);
  CHECK(src.m() == 3);  // {1,2} x3 and {1,2,3}
  CHECK(tgt.m() == 5);  // {1,2,3,5}, {2,4}, {3,5}
  CHECK_THROWS(split_source_target(db, 0.0));
  CHECK_THROWS(split_source_target(db, 1.0));
  const auto tiny = TransactionDatabase::from_transactions({{1}});
  CHECK_THROWS_WITH(split_source_target(tiny, 0.5),
                    Catch::Matchers::ContainsSubstring("empty partition"));
}

TEST_CASE("synthetic fixture has the documented shape", "[dataset]") {
  const auto db = testsupport::synthetic_hui_db();
  REQUIRE(db.n() == 200);
  REQUIRE(db.m() == 12);
  REQUIRE(db.utility_mode());
  for (Item i = 0; i < db.m(); ++i) {
    INFO("item " << db.external_id(i));
    CHECK(db.item_twu(i) >= testsupport::kSyntheticHuiThreshold);
    if (db.external_id(i) >= 11) CHECK(db.item_support(i) == 15);
  }
}
