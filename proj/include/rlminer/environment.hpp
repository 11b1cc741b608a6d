#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_set>
#include <vector>

#include "rlminer/core.hpp"
#include "rlminer/dataset.hpp"
#include "rlminer/measures.hpp"
#include "rlminer/rng.hpp"

namespace rlminer {

// Candidate itemset under edit: one inclusion bit per internal item.
class BitVector {
 public:
  explicit BitVector(Item m) : bits_(m, 0) {}

  Item m() const { return static_cast<Item>(bits_.size()); }
  bool test(Item i) const { return bits_[i] != 0; }
  void set(Item i, bool v) { bits_[i] = v ? 1 : 0; }
  void flip(Item i) { bits_[i] ^= 1; }

  int count() const {
    int c = 0;
    for (auto b : bits_) c += b;
    return c;
  }

  std::vector<Item> items() const {
    std::vector<Item> out;
    for (Item i = 0; i < m(); ++i)
      if (bits_[i]) out.push_back(i);
    return out;
  }

  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

// Actions are indices in [0, M]: index < M flips that bit, index == M redraws
// the bit-vector from scratch.
inline constexpr bool is_reinitialize(int action, Item m) { return action == m; }

using PatternSet = std::unordered_set<Pattern, PatternHash>;

struct StepOutcome {
  int reward = 0;                    // in {-1, 0, 1, 2, 3, 4, 100}
  std::optional<Pattern> extracted;  // set when the result meets every threshold
  std::int64_t measure_value = 0;    // support or utility of the resulting itemset
  double confidence = 0.0;           // AR only
};

// Bits drawn independently, bit m with probability support(m)/n, redrawn until
// the induced itemset is nonempty and occurs in the database.
inline BitVector random_initialize(const TransactionDatabase& db, Rng& rng,
                                   int retry_cap = 10000) {
  const Item m = db.m();
  const double n = static_cast<double>(db.n());
  BitVector b(m);
  for (int attempt = 0; attempt < retry_cap; ++attempt) {
    bool any = false;
    for (Item i = 0; i < m; ++i) {
      const bool on = rng.bernoulli(static_cast<double>(db.item_support(i)) / n);
      b.set(i, on);
      any |= on;
    }
    if (!any) continue;
    const auto items = b.items();
    if (exists_in(db, items)) return b;
  }
  throw std::runtime_error(
      "random initialization failed after " + std::to_string(retry_cap) +
      " attempts; the pruning threshold may be too aggressive");
}

inline BitVector apply_action(const BitVector& bits, int action,
                              const TransactionDatabase& db, Rng& rng) {
  if (is_reinitialize(action, bits.m())) return random_initialize(db, rng);
  BitVector next = bits;
  next.flip(static_cast<Item>(action));
  return next;
}

namespace detail {
// Bracket rewards below the extraction threshold, exact integer comparisons:
// [0, t/4) -> 0, [t/4, t/2) -> 1, [t/2, 3t/4) -> 2, [3t/4, t) -> 3.
// Callers handle value >= t.
inline int bracket_reward(std::int64_t value, std::int64_t threshold) {
  if (4 * value < threshold) return 0;
  if (2 * value < threshold) return 1;
  if (4 * value < 3 * threshold) return 2;
  return 3;
}

inline std::int64_t itemset_measure(const TransactionDatabase& db, Task task,
                                    std::span<const Item> items) {
  return task == Task::kHui ? utility(db, items) : support(db, items);
}
}  // namespace detail

// Reward for the transition prev -> next. On a qualifying result the pattern
// is recorded in `episode_extracted`; `extracted` is set whenever thresholds
// are met so the caller can maintain the global result set (reward 100 on the
// first extraction in the episode, 4 on a repeat).
inline StepOutcome compute_reward(const BitVector& prev, const BitVector& next,
                                  int action, const TransactionDatabase& db,
                                  const MeasureConfig& cfg,
                                  PatternSet& episode_extracted) {
  StepOutcome out;
  const auto next_items = next.items();

  if (next_items.empty() || !exists_in(db, next_items)) {
    out.reward = -1;
    return out;
  }

  if (cfg.task != Task::kAr) {
    const std::int64_t value = detail::itemset_measure(db, cfg.task, next_items);
    out.measure_value = value;
    if (value >= cfg.threshold) {
      Pattern p{next_items, Pattern::kNoConsequent};
      const bool novel = episode_extracted.insert(p).second;
      out.reward = novel ? 100 : 4;
      out.extracted = std::move(p);
    } else {
      out.reward = detail::bracket_reward(value, cfg.threshold);
    }
    return out;
  }

  // AR. The rule is read off the edit direction; a reinitialized itemset has
  // no edit, so it is scored on its own support and can never extract.
  if (is_reinitialize(action, prev.m())) {
    const std::int64_t sup = support(db, next_items);
    out.measure_value = sup;
    out.reward = sup >= cfg.threshold ? 4 : detail::bracket_reward(sup, cfg.threshold);
    return out;
  }

  const Item flipped = static_cast<Item>(action);
  const bool added = next.test(flipped);
  std::vector<Item> antecedent;
  std::int64_t sup_union = 0;
  if (added) {
    antecedent = prev.items();
    if (antecedent.empty()) {  // rule with empty antecedent
      out.reward = -1;
      return out;
    }
    sup_union = support(db, next_items);
  } else {
    antecedent = next_items;
    sup_union = support(db, prev.items());
  }
  out.measure_value = sup_union;
  if (sup_union < cfg.threshold) {
    out.reward = detail::bracket_reward(sup_union, cfg.threshold);
    return out;
  }
  const std::int64_t sup_ant = support(db, antecedent);
  out.confidence = sup_ant > 0
                       ? static_cast<double>(sup_union) / static_cast<double>(sup_ant)
                       : 0.0;
  if (!cfg.confidence_at_least(sup_union, sup_ant)) {
    out.reward = 4;
    return out;
  }
  Pattern rule{std::move(antecedent), flipped};
  const bool novel = episode_extracted.insert(rule).second;
  out.reward = novel ? 100 : 4;
  out.extracted = std::move(rule);
  return out;
}

namespace detail {
// Leave-one-out covers of the current itemset: loo[j] = AND of all member
// bitmaps except items[j], via prefix/suffix products.
inline std::vector<std::vector<Word>> leave_one_out_covers(
    const TransactionDatabase& db, const std::vector<Item>& items) {
  const std::size_t k = items.size();
  std::vector<std::vector<Word>> loo(k);
  if (k == 0) return loo;
  std::vector<std::vector<Word>> prefix(k), suffix(k);
  prefix[0] = bitmap_full(static_cast<std::size_t>(db.n()));
  for (std::size_t j = 1; j < k; ++j) {
    prefix[j] = prefix[j - 1];
    bitmap_and_into(prefix[j], db.item_bitmap(items[j - 1]));
  }
  suffix[k - 1] = bitmap_full(static_cast<std::size_t>(db.n()));
  for (std::size_t j = k - 1; j > 0; --j) {
    suffix[j - 1] = suffix[j];
    bitmap_and_into(suffix[j - 1], db.item_bitmap(items[j]));
  }
  for (std::size_t j = 0; j < k; ++j) {
    loo[j] = prefix[j];
    bitmap_and_into(loo[j], suffix[j]);
  }
  return loo;
}
}  // namespace detail

// One-flip-ahead interestingness with log normalization: dimension m is
// log(phi(X(b with bit m flipped))/Z + 1). HUI/FI produce M values; AR
// produces 2M (first half support with Z=N, second half rule confidence with
// Z=1). Empty or absent one-flip itemsets contribute phi = 0.
inline std::vector<double> compute_state(const BitVector& bits,
                                         const TransactionDatabase& db,
                                         const MeasureConfig& cfg) {
  const Item m = db.m();
  const auto items = bits.items();
  const double z_support = static_cast<double>(db.n());

  // Cover of the current itemset (all-ones for the empty set) and positions.
  std::vector<Word> cover = bitmap_full(static_cast<std::size_t>(db.n()));
  for (Item i : items) bitmap_and_into(cover, db.item_bitmap(i));
  const auto loo = detail::leave_one_out_covers(db, items);
  std::vector<std::size_t> pos_in_items(m, SIZE_MAX);
  for (std::size_t j = 0; j < items.size(); ++j) pos_in_items[items[j]] = j;

  auto log_norm = [](double phi, double z) { return std::log(phi / z + 1.0); };

  if (cfg.task != Task::kAr) {
    const double z = normalization_factor(db, cfg.task);
    std::vector<double> state(m, 0.0);
    for (Item i = 0; i < m; ++i) {
      double phi = 0.0;
      if (!bits.test(i)) {
        if (cfg.task == Task::kFi) {
          phi = static_cast<double>(bitmap_count_and(cover, db.item_bitmap(i)));
        } else {
          std::vector<Word> c = cover;
          std::vector<Item> grown = items;
          grown.insert(std::lower_bound(grown.begin(), grown.end(), i), i);
          phi = bitmap_and_into(c, db.item_bitmap(i))
                    ? static_cast<double>(detail::utility_on_cover(db, c, grown))
                    : 0.0;
        }
      } else if (items.size() > 1) {
        const std::size_t j = pos_in_items[i];
        if (cfg.task == Task::kFi) {
          phi = static_cast<double>(bitmap_count(loo[j]));
        } else {
          std::vector<Item> shrunk = items;
          shrunk.erase(shrunk.begin() + static_cast<std::ptrdiff_t>(j));
          phi = static_cast<double>(detail::utility_on_cover(db, loo[j], shrunk));
        }
      }  // removing the only item leaves the empty itemset: phi stays 0
      state[i] = log_norm(phi, z);
    }
    return state;
  }

  // AR: support half uses sup(X_a u X_c), which is the larger of the two
  // itemsets along the edit; confidence half rates the induced rule.
  const std::int64_t sup_cur = items.empty() ? 0 : bitmap_count(cover);
  std::vector<double> state(2 * static_cast<std::size_t>(m), 0.0);
  for (Item i = 0; i < m; ++i) {
    double sup_part = 0.0, conf_part = 0.0;
    if (!bits.test(i)) {
      const std::int64_t sup_grown = bitmap_count_and(cover, db.item_bitmap(i));
      sup_part = static_cast<double>(sup_grown);
      if (!items.empty() && sup_cur > 0)
        conf_part = static_cast<double>(sup_grown) / static_cast<double>(sup_cur);
    } else if (items.size() > 1) {
      const std::int64_t sup_shrunk = bitmap_count(loo[pos_in_items[i]]);
      sup_part = static_cast<double>(sup_cur);
      if (sup_shrunk > 0)
        conf_part = static_cast<double>(sup_cur) / static_cast<double>(sup_shrunk);
    }  // removing the only item: empty result, both halves 0
    state[i] = log_norm(sup_part, z_support);
    state[static_cast<std::size_t>(m) + i] = log_norm(conf_part, 1.0);
  }
  return state;
}

// Appends the scalar 0.02 * mean to produce the fused score's state side; the
// mean is over the support half only for AR states.
inline std::vector<double> extend_state(std::span<const double> state, Task task) {
  const std::size_t m = task == Task::kAr ? state.size() / 2 : state.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) sum += state[i];
  std::vector<double> out(state.begin(), state.begin() + static_cast<std::ptrdiff_t>(m));
  out.push_back(0.02 * (m == 0 ? 0.0 : sum / static_cast<double>(m)));
  return out;
}

}  // namespace rlminer
