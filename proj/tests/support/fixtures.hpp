#pragma once

// Shared test fixtures. The hand-computed numbers living next to each fixture
// are frozen here once and asserted in the unit tests; if a fixture changes,
// the numbers must be re-derived by hand.

#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlminer/dataset.hpp"
#include "rlminer/trainer.hpp"

namespace testsupport {

// Seven plain transactions over items {1,2,3,4,5}.
// Supports: 1->5, 2->6, 3->3, 4->1, 5->2.
// sup({1,2}) = 5, sup({1,2,3}) = 2, sup({2,3,5}) = 1, sup({2,3,4}) = 0.
// Frequent itemsets at min_sup 5: {1}, {2}, {1,2}.
inline rlminer::TransactionDatabase fig2_db() {
  return rlminer::TransactionDatabase::from_transactions({
      {1, 2},
      {1, 2},
      {1, 2},
      {1, 2, 3},
      {1, 2, 3, 5},
      {2, 4},
      {3, 5},
  });
}

inline std::string data_dir() {
  const char* dir = std::getenv("RLMINER_DATA_DIR");
  if (!dir) throw std::runtime_error("RLMINER_DATA_DIR is not set");
  return dir;
}

// Four utility transactions over items {1,2,3}.
//   t1: 1:5 2:10 3:1   (TU 16)
//   t2: 2:4 3:2        (TU 6)
//   t3: 1:2 3:3        (TU 5)
//   t4: 2:8            (TU 8)
// total utility 35. TWU: 1->21, 2->30, 3->27.
// utility: {1}=7 {2}=22 {3}=6 {1,2}=15 {1,3}=11 {2,3}=17 {1,2,3}=16.
// High-utility itemsets at xi=15: {2}, {1,2}, {2,3}, {1,2,3}.
inline rlminer::TransactionDatabase small_utility_db() {
  return rlminer::TransactionDatabase::from_transactions(
      {{1, 2, 3}, {2, 3}, {1, 3}, {2}},
      {{5, 10, 1}, {4, 2}, {2, 3}, {8}});
}

// Eight plain transactions giving singleton supports 1, 2, 4, 6, 8 for items
// 1..5, so at min_sup 8 the supports sit exactly on the reward-case
// boundaries xi/8, xi/4, xi/2, 3xi/4 and xi.
inline rlminer::TransactionDatabase boundary_db() {
  std::vector<std::vector<std::int64_t>> txs;
  for (int t = 0; t < 8; ++t) {
    std::vector<std::int64_t> tx;
    if (t < 1) tx.push_back(1);
    if (t < 2) tx.push_back(2);
    if (t < 4) tx.push_back(3);
    if (t < 6) tx.push_back(4);
    tx.push_back(5);
    txs.push_back(std::move(tx));
  }
  return rlminer::TransactionDatabase::from_transactions(txs);
}

// --- synthetic utility dataset for the end-to-end desk runs ---------------
//
// 200 transactions over 12 items: six "heavy" items (ids 11..16) and six
// "cheap" items (ids 1..6).
//
//   - Every unordered heavy pair occurs as 3 dedicated transactions with
//     per-item utility 30 (45 transactions, TU 60 each). Heavy triples and
//     larger never co-occur.
//   - Each cheap item rides along in 2 of those pair transactions, for two
//     different pairs, with utility 0: that keeps its TWU high without
//     adding utility to any mixed itemset.
//   - 120 singleton cheap transactions (20 per item, utility 1), 30 ring
//     pair transactions {c, c+1} (5 per ring edge, utility 1 each), and 5
//     three-item cheap transactions pad the database to 200.
//
// At xi = 120:
//   - heavy singletons: utility 15*30 = 450  -> qualify
//   - heavy pairs:      utility 3*60  = 180  -> qualify
//   - heavy triples+:   support 0            -> nonexistent
//   - mixed sets:       at most one pair transaction carries any given cheap
//     item, so utility <= 60 -> never qualify
//   - cheap-only sets:  utility <= ~40       -> never qualify
// giving exactly 6 + 15 = 21 high-utility itemsets.
//
// Supports: heavy 15/200, cheap ~36/200, so random initialization lands in
// the heavy half often enough for the guided agents while the 2^12 search
// space stays large relative to the 21 targets.
inline rlminer::TransactionDatabase synthetic_hui_db() {
  std::vector<std::vector<std::int64_t>> txs, utils;

  // Heavy pair transactions; pair index p enumerates (i, j), i < j.
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j) pairs.emplace_back(i, j);
  for (int p = 0; p < 15; ++p) {
    for (int copy = 0; copy < 3; ++copy) {
      std::vector<std::int64_t> tx{11 + pairs[static_cast<std::size_t>(p)].first,
                                   11 + pairs[static_cast<std::size_t>(p)].second};
      std::vector<std::int64_t> us{30, 30};
      // Cheap item c rides copy 0 of pairs c and (c + 7) % 15.
      for (int c = 0; c < 6; ++c) {
        if (copy == 0 && (p == c || p == (c + 7) % 15)) {
          tx.push_back(1 + c);
          us.push_back(0);
        }
      }
      txs.push_back(std::move(tx));
      utils.push_back(std::move(us));
    }
  }

  // Cheap-only transactions.
  for (int c = 0; c < 6; ++c) {
    for (int rep = 0; rep < 20; ++rep) {
      txs.push_back({1 + c});
      utils.push_back({1});
    }
  }
  for (int c = 0; c < 6; ++c) {
    for (int rep = 0; rep < 5; ++rep) {
      txs.push_back({1 + c, 1 + (c + 1) % 6});
      utils.push_back({1, 1});
    }
  }
  for (int k = 0; k < 5; ++k) {
    txs.push_back({1 + k % 6, 1 + (k + 2) % 6, 1 + (k + 4) % 6});
    utils.push_back({1, 1, 1});
  }

  // Interleave so a 60/40 front split leaves both partitions with heavy
  // pairs and cheap context: place transaction i at slot (i * 73) % 200.
  // 73 is coprime with 200, so this is a permutation.
  std::vector<std::vector<std::int64_t>> txs2(200), utils2(200);
  if (txs.size() != 200) throw std::logic_error("synthetic fixture is not 200 transactions");
  for (std::size_t i = 0; i < 200; ++i) {
    txs2[(i * 73) % 200] = std::move(txs[i]);
    utils2[(i * 73) % 200] = std::move(utils[i]);
  }
  return rlminer::TransactionDatabase::from_transactions(txs2, utils2);
}

inline constexpr std::int64_t kSyntheticHuiThreshold = 120;
inline constexpr std::size_t kSyntheticHuiCount = 21;

// Small network and episode budget for the desk-scale end-to-end runs; the
// published per-task budgets take hours on this dataset class.
inline rlminer::RunConfig desk_config(rlminer::Task task, rlminer::AgentKind agent,
                                      std::uint64_t seed) {
  rlminer::RunConfig c = rlminer::RunConfig::defaults(task, agent);
  c.seed = seed;
  c.episodes = 50;
  c.steps_per_episode = 200;
  c.hidden_widths = {48};
  c.batch_size = 128;
  c.replay_capacity = 4000;
  return c;
}

}  // namespace testsupport
