#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rlminer/core.hpp"
#include "rlminer/dataset.hpp"
#include "rlminer/measures.hpp"

namespace rlminer {

// Exhaustive miners used as ground truth for the learned agents. They favor
// transparency over raw speed, but are levelwise/pruned well enough to handle
// the benchmark databases. `candidate_cap` bounds total candidate generation;
// exceeding it aborts with a hint to raise the threshold.

inline constexpr std::size_t kDefaultCandidateCap = 20'000'000;

namespace detail {

[[noreturn]] inline void candidate_cap_exceeded(std::size_t cap) {
  throw std::runtime_error(
      "exhaustive search exceeded " + std::to_string(cap) +
      " candidates; raise the threshold or the candidate cap");
}

}  // namespace detail

// Apriori, levelwise with per-itemset cover bitmaps. A candidate's cover is
// its generating parent's cover AND the last item's bitmap, so each support
// count is one intersection.
inline std::vector<ScoredPattern> mine_fi_exhaustive(
    const TransactionDatabase& db, std::int64_t min_support,
    std::size_t candidate_cap = kDefaultCandidateCap) {
  if (min_support < 1) throw std::runtime_error("minimum support must be >= 1");
  struct Node {
    std::vector<Item> items;
    std::vector<Word> cover;
    std::int64_t sup;
  };
  std::vector<ScoredPattern> out;
  std::vector<Node> level;
  std::size_t candidates = 0;
  for (Item i = 0; i < db.m(); ++i) {
    if (++candidates > candidate_cap) detail::candidate_cap_exceeded(candidate_cap);
    const std::int64_t sup = db.item_support(i);
    if (sup < min_support) continue;
    level.push_back({{i}, db.item_bitmap(i), sup});
    out.push_back({Pattern{{i}}, sup, 0});
  }
  while (!level.empty()) {
    std::unordered_set<Pattern, PatternHash> frequent;
    frequent.reserve(level.size() * 2);
    for (const Node& n : level) frequent.insert(Pattern{n.items});
    std::vector<Node> next;
    // Nodes are lexicographically sorted, so joinable pairs (equal prefixes,
    // differing last item) are adjacent runs.
    for (std::size_t i = 0; i < level.size(); ++i) {
      for (std::size_t j = i + 1; j < level.size(); ++j) {
        const auto& a = level[i].items;
        const auto& b = level[j].items;
        if (!std::equal(a.begin(), a.end() - 1, b.begin(), b.end() - 1)) break;
        if (++candidates > candidate_cap)
          detail::candidate_cap_exceeded(candidate_cap);
        std::vector<Item> cand = a;
        cand.push_back(b.back());
        // Downward closure: every (k-1)-subset must be frequent. Dropping
        // the last position reproduces the left parent, so skip it.
        bool closed = true;
        for (std::size_t drop = 0; drop + 2 <= cand.size() && closed; ++drop) {
          std::vector<Item> s = cand;
          s.erase(s.begin() + static_cast<std::ptrdiff_t>(drop));
          closed = frequent.contains(Pattern{std::move(s)});
        }
        if (!closed) continue;
        std::vector<Word> cover = level[i].cover;
        bitmap_and_into(cover, db.item_bitmap(b.back()));
        const std::int64_t sup = bitmap_count(cover);
        if (sup < min_support) continue;
        out.push_back({Pattern{cand}, sup, 0});
        next.push_back({std::move(cand), std::move(cover), sup});
      }
    }
    level = std::move(next);
  }
  std::sort(out.begin(), out.end(),
            [](const ScoredPattern& x, const ScoredPattern& y) {
              return x.pattern < y.pattern;
            });
  return out;
}

// Rules come straight out of the frequent itemsets: for each frequent X with
// |X| >= 2 and each single-item consequent c in X, the antecedent X\{c} is
// frequent too (downward closure), so its support is a map lookup. The exact
// rational comparison avoids floating-point boundary misses.
inline std::vector<ScoredPattern> mine_ar_exhaustive(
    const TransactionDatabase& db, const MeasureConfig& cfg,
    std::size_t candidate_cap = kDefaultCandidateCap) {
  if (cfg.task != Task::kAr) throw std::runtime_error("measure config is not ar");
  const std::vector<ScoredPattern> fis =
      mine_fi_exhaustive(db, cfg.threshold, candidate_cap);
  std::unordered_map<Pattern, std::int64_t, PatternHash> sup;
  sup.reserve(fis.size() * 2);
  for (const auto& f : fis) sup.emplace(f.pattern, f.measure);
  std::vector<ScoredPattern> out;
  for (const auto& f : fis) {
    if (f.pattern.items.size() < 2) continue;
    for (std::size_t k = 0; k < f.pattern.items.size(); ++k) {
      Pattern ant{f.pattern.items};
      const Item cons = ant.items[k];
      ant.items.erase(ant.items.begin() + static_cast<std::ptrdiff_t>(k));
      const std::int64_t ant_sup = sup.at(ant);
      if (!cfg.confidence_at_least(f.measure, ant_sup)) continue;
      out.push_back({Pattern{std::move(ant.items), cons}, f.measure, ant_sup});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const ScoredPattern& x, const ScoredPattern& y) {
              return x.pattern < y.pattern;
            });
  return out;
}

namespace detail {

struct UtilityEntry {
  Tid tid;
  std::int64_t iutil;
  std::int64_t rutil;
};

struct UtilityList {
  Item item;  // internal id
  std::vector<UtilityEntry> entries;
  std::int64_t iutil_sum = 0;
  std::int64_t rutil_sum = 0;
};

inline std::int64_t prefix_iutil(const std::vector<UtilityEntry>& prefix, Tid tid) {
  auto it = std::lower_bound(prefix.begin(), prefix.end(), tid,
                             [](const UtilityEntry& e, Tid t) { return e.tid < t; });
  return it->iutil;  // prefix covers every tid its extensions cover
}

}  // namespace detail

// Utility-list search: depth-first over a TWU-ascending item order, pruning a
// branch when its itemset utility plus remaining utility cannot reach the
// threshold. Items whose TWU is below the threshold cannot be in any result
// and are dropped up front.
inline std::vector<ScoredPattern> mine_hui_exhaustive(
    const TransactionDatabase& db, std::int64_t min_utility,
    std::size_t candidate_cap = kDefaultCandidateCap) {
  if (!db.utility_mode())
    throw std::runtime_error("utility mining needs a utility database");
  if (min_utility < 1) throw std::runtime_error("minimum utility must be >= 1");

  std::vector<Item> order;
  for (Item i = 0; i < db.m(); ++i)
    if (db.item_twu(i) >= min_utility) order.push_back(i);
  std::sort(order.begin(), order.end(), [&db](Item a, Item b) {
    if (db.item_twu(a) != db.item_twu(b)) return db.item_twu(a) < db.item_twu(b);
    return a < b;
  });
  std::vector<std::size_t> rank(static_cast<std::size_t>(db.m()), SIZE_MAX);
  for (std::size_t r = 0; r < order.size(); ++r)
    rank[static_cast<std::size_t>(order[r])] = r;

  // Initial per-item utility lists; rutil counts kept items after the item in
  // the search order within the same transaction.
  std::vector<detail::UtilityList> singles(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) singles[r].item = order[r];
  for (Tid t = 0; t < db.n(); ++t) {
    const auto& items = db.transaction(t);
    const auto& utils = db.transaction_item_utilities(t);
    std::vector<std::pair<std::size_t, std::int64_t>> kept;  // (rank, util)
    for (std::size_t k = 0; k < items.size(); ++k) {
      const std::size_t r = rank[static_cast<std::size_t>(items[k])];
      if (r != SIZE_MAX) kept.emplace_back(r, utils[k]);
    }
    std::sort(kept.begin(), kept.end());
    std::int64_t rest = 0;
    for (const auto& [r, u] : kept) rest += u;
    for (const auto& [r, u] : kept) {
      rest -= u;
      singles[r].entries.push_back({t, u, rest});
      singles[r].iutil_sum += u;
      singles[r].rutil_sum += rest;
    }
  }

  std::size_t candidates = order.size();
  std::vector<ScoredPattern> out;
  std::vector<Item> stack;

  auto emit = [&](const detail::UtilityList& ul) {
    if (ul.iutil_sum < min_utility) return;
    std::vector<Item> items = stack;
    items.push_back(ul.item);
    std::sort(items.begin(), items.end());
    out.push_back({Pattern{std::move(items)}, ul.iutil_sum, 0});
  };

  // `prefix` is the utility list of `stack`; empty entries mean the empty
  // prefix. `exts` are lists of stack + one item, ordered by search rank.
  auto dfs = [&](auto&& self, const std::vector<detail::UtilityEntry>& prefix,
                 const std::vector<detail::UtilityList>& exts) -> void {
    for (std::size_t x = 0; x < exts.size(); ++x) {
      const auto& px = exts[x];
      emit(px);
      if (px.iutil_sum + px.rutil_sum < min_utility) continue;
      std::vector<detail::UtilityList> next;
      for (std::size_t y = x + 1; y < exts.size(); ++y) {
        const auto& py = exts[y];
        if (++candidates > candidate_cap)
          detail::candidate_cap_exceeded(candidate_cap);
        detail::UtilityList joined;
        joined.item = py.item;
        auto ix = px.entries.begin();
        auto iy = py.entries.begin();
        while (ix != px.entries.end() && iy != py.entries.end()) {
          if (ix->tid < iy->tid) {
            ++ix;
          } else if (iy->tid < ix->tid) {
            ++iy;
          } else {
            std::int64_t iu = ix->iutil + iy->iutil;
            if (!prefix.empty()) iu -= detail::prefix_iutil(prefix, ix->tid);
            joined.entries.push_back({ix->tid, iu, iy->rutil});
            joined.iutil_sum += iu;
            joined.rutil_sum += iy->rutil;
            ++ix;
            ++iy;
          }
        }
        if (!joined.entries.empty()) next.push_back(std::move(joined));
      }
      if (!next.empty()) {
        stack.push_back(px.item);
        self(self, px.entries, next);
        stack.pop_back();
      }
    }
  };
  dfs(dfs, {}, singles);

  std::sort(out.begin(), out.end(),
            [](const ScoredPattern& x, const ScoredPattern& y) {
              return x.pattern < y.pattern;
            });
  return out;
}

// Task dispatch used by the CLI baseline command.
inline std::vector<ScoredPattern> mine_exhaustive(
    const TransactionDatabase& db, const MeasureConfig& cfg,
    std::size_t candidate_cap = kDefaultCandidateCap) {
  switch (cfg.task) {
    case Task::kFi: return mine_fi_exhaustive(db, cfg.threshold, candidate_cap);
    case Task::kAr: return mine_ar_exhaustive(db, cfg, candidate_cap);
    case Task::kHui: return mine_hui_exhaustive(db, cfg.threshold, candidate_cap);
  }
  throw std::logic_error("unknown task");
}

}  // namespace rlminer
