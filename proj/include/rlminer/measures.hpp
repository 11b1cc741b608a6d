#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "rlminer/core.hpp"
#include "rlminer/dataset.hpp"

namespace rlminer {

// Absolute thresholds for one mining run. `threshold` is a minimum support
// count (FI, AR) or a minimum utility (HUI). The AR minimum confidence is an
// exact rational so that boundary comparisons cannot be lost to float
// rounding.
struct MeasureConfig {
  Task task = Task::kFi;
  std::int64_t threshold = 1;
  std::int64_t conf_num = 0;
  std::int64_t conf_den = 1;

  // sup_union / sup_ant >= conf_num / conf_den, exactly.
  bool confidence_at_least(std::int64_t sup_union, std::int64_t sup_ant) const {
    if (sup_ant <= 0) return false;
    return sup_union * conf_den >= conf_num * sup_ant;
  }

  static MeasureConfig fi(std::int64_t min_support) {
    return {Task::kFi, min_support, 0, 1};
  }
  static MeasureConfig hui(std::int64_t min_utility) {
    return {Task::kHui, min_utility, 0, 1};
  }
  static MeasureConfig ar(std::int64_t min_support, Percent min_conf) {
    return {Task::kAr, min_support, min_conf.num, min_conf.den * 100};
  }
};

namespace detail {
// Covering-tid bitmap of an itemset: AND of the member bitmaps. Empty itemset
// covers everything. Returns false if the cover is empty.
inline bool itemset_cover(const TransactionDatabase& db, std::span<const Item> items,
                          std::vector<Word>& cover) {
  if (items.empty()) {
    cover = bitmap_full(static_cast<std::size_t>(db.n()));
    return db.n() > 0;
  }
  cover = db.item_bitmap(items[0]);
  for (std::size_t i = 1; i < items.size(); ++i)
    if (!bitmap_and_into(cover, db.item_bitmap(items[i]))) return false;
  for (Word w : cover)
    if (w) return true;
  return false;
}

// Sum of the utilities of `items` in transaction t. Both sides sorted
// ascending by internal id.
inline std::int64_t transaction_utility_of(const TransactionDatabase& db, Tid t,
                                           std::span<const Item> items) {
  const auto& tx = db.transaction(t);
  const auto& us = db.transaction_item_utilities(t);
  std::int64_t sum = 0;
  std::size_t a = 0, b = 0;
  while (a < tx.size() && b < items.size()) {
    if (tx[a] < items[b]) {
      ++a;
    } else if (tx[a] > items[b]) {
      ++b;
    } else {
      sum += us[a];
      ++a;
      ++b;
    }
  }
  return sum;
}

// Total utility of `items` over the transactions set in `cover`; the cover
// must already be the itemset's covering bitmap.
inline std::int64_t utility_on_cover(const TransactionDatabase& db,
                                     const std::vector<Word>& cover,
                                     std::span<const Item> items) {
  std::int64_t total = 0;
  bitmap_for_each(cover, [&](Tid t) { total += transaction_utility_of(db, t, items); });
  return total;
}
}  // namespace detail

// Number of transactions containing every item of `items` (internal ids,
// sorted ascending). support({}) = n by convention; callers that need the
// empty itemset to read as 0 handle that themselves.
inline std::int64_t support(const TransactionDatabase& db, std::span<const Item> items) {
  if (items.empty()) return db.n();
  if (items.size() == 1) return db.item_support(items[0]);
  thread_local std::vector<Word> cover;
  cover = db.item_bitmap(items[0]);
  for (std::size_t i = 1; i + 1 < items.size(); ++i)
    if (!bitmap_and_into(cover, db.item_bitmap(items[i]))) return 0;
  return bitmap_count_and(cover, db.item_bitmap(items.back()));
}

inline bool exists_in(const TransactionDatabase& db, std::span<const Item> items) {
  return support(db, items) >= 1;
}

// Summed utility of `items` over the transactions that contain all of them.
inline std::int64_t utility(const TransactionDatabase& db, std::span<const Item> items) {
  if (!db.utility_mode()) throw std::logic_error("utility() needs a utility-mode database");
  if (items.empty()) return 0;
  thread_local std::vector<Word> cover;
  if (!detail::itemset_cover(db, items, cover)) return 0;
  return detail::utility_on_cover(db, cover, items);
}

struct Confidence {
  double value = 0.0;
  bool undefined = false;  // antecedent never occurs
};

// confidence(antecedent => consequent) = sup(antecedent u {consequent}) /
// sup(antecedent). A zero antecedent support yields value 0 with the
// `undefined` flag set instead of an error; a consequent already inside the
// antecedent is malformed and rejected.
inline Confidence confidence(const TransactionDatabase& db,
                             std::span<const Item> antecedent, Item consequent) {
  auto pos = std::lower_bound(antecedent.begin(), antecedent.end(), consequent);
  if (pos != antecedent.end() && *pos == consequent)
    throw std::runtime_error("rule consequent overlaps its antecedent");
  const std::int64_t sup_ant = support(db, antecedent);
  if (sup_ant == 0) return {0.0, true};
  std::vector<Item> joint(antecedent.begin(), antecedent.end());
  joint.insert(joint.begin() + (pos - antecedent.begin()), consequent);
  const std::int64_t sup_joint = support(db, joint);
  return {static_cast<double>(sup_joint) / static_cast<double>(sup_ant), false};
}

// Normalization constant Z for state values: the measure value of the
// heaviest possible itemset. FI and the AR support component use the
// transaction count; HUI uses the total utility. The AR confidence component
// is already in [0, 1] and uses Z = 1.
inline double normalization_factor(const TransactionDatabase& db, Task task) {
  if (task == Task::kHui) return static_cast<double>(db.total_utility());
  return static_cast<double>(db.n());
}

}  // namespace rlminer
