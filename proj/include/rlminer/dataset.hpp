#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rlminer/core.hpp"

namespace rlminer {

struct DatasetStats {
  Tid transaction_count = 0;
  Item item_count = 0;
  double avg_transaction_len = 0.0;
  std::int64_t total_utility = 0;  // 0 in plain mode
};

// In-memory transaction database. Item ids are remapped to a dense internal
// range [0, m) in first-occurrence order; external ids are kept for output.
// Transactions store internal ids sorted ascending. A per-item tid index
// (sorted tid list + bitmap) is built once at construction; everything else
// derives from it.
class TransactionDatabase {
 public:
  // Plain format: one transaction per line, whitespace-separated non-negative
  // integer ids. Duplicate ids within a line are deduplicated. Blank lines are
  // skipped.
  static TransactionDatabase load_plain(std::istream& in) {
    Builder b(/*utility_mode=*/false);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      strip_cr(line);
      if (is_blank(line)) continue;
      std::istringstream iss(line);
      std::vector<std::int64_t> ids;
      std::int64_t v;
      while (iss >> v) {
        if (v < 0) parse_fail(line_no, "negative item id");
        ids.push_back(v);
      }
      if (!iss.eof()) parse_fail(line_no, "invalid item token");
      dedup_preserving_order(ids);
      b.add(line_no, ids, {});
    }
    return b.finish();
  }

  // Utility format: "i1 i2 ... iP:TU:u1 u2 ... uP". The per-item field is the
  // utility of that item occurrence; TU must equal the sum of the fields
  // exactly.
  static TransactionDatabase load_utility(std::istream& in) {
    Builder b(/*utility_mode=*/true);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      strip_cr(line);
      if (is_blank(line)) continue;
      const auto c1 = line.find(':');
      const auto c2 = c1 == std::string::npos ? std::string::npos
                                              : line.find(':', c1 + 1);
      if (c2 == std::string::npos) parse_fail(line_no, "expected two ':' separators");
      if (line.find(':', c2 + 1) != std::string::npos)
        parse_fail(line_no, "too many ':' separators");
      const auto ids = parse_ints(line.substr(0, c1), line_no, "item id");
      const auto tu_vec = parse_ints(line.substr(c1 + 1, c2 - c1 - 1), line_no,
                                     "transaction utility");
      const auto utils = parse_ints(line.substr(c2 + 1), line_no, "item utility");
      if (tu_vec.size() != 1) parse_fail(line_no, "transaction utility must be a single integer");
      if (ids.size() != utils.size())
        parse_fail(line_no, "item count does not match utility count");
      for (std::int64_t u : utils)
        if (u < 0) parse_fail(line_no, "negative item utility");
      const std::int64_t sum = std::accumulate(utils.begin(), utils.end(), std::int64_t{0});
      if (sum != tu_vec[0])
        parse_fail(line_no, "transaction utility does not equal the sum of item utilities");
      for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = i + 1; j < ids.size(); ++j)
          if (ids[i] == ids[j]) parse_fail(line_no, "duplicate item id");
      b.add(line_no, ids, utils);
    }
    return b.finish();
  }

  static TransactionDatabase load_plain_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    return load_plain(f);
  }

  static TransactionDatabase load_utility_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    return load_utility(f);
  }

  // Builds a database from external-id transactions (pre-deduplicated).
  // `utils` is empty for plain mode, otherwise parallel to `transactions`.
  static TransactionDatabase from_transactions(
      const std::vector<std::vector<std::int64_t>>& transactions,
      const std::vector<std::vector<std::int64_t>>& utils = {}) {
    Builder b(!utils.empty());
    for (std::size_t t = 0; t < transactions.size(); ++t)
      b.add(static_cast<int>(t) + 1, transactions[t],
            utils.empty() ? std::vector<std::int64_t>{} : utils[t]);
    return b.finish();
  }

  bool utility_mode() const { return utility_mode_; }
  Tid n() const { return static_cast<Tid>(transactions_.size()); }
  Item m() const { return static_cast<Item>(internal_to_external_.size()); }

  const std::vector<Item>& transaction(Tid t) const { return transactions_[t]; }
  const std::vector<std::int64_t>& transaction_item_utilities(Tid t) const {
    return item_utilities_[t];
  }
  std::int64_t transaction_utility(Tid t) const { return transaction_utilities_[t]; }

  Item external_id(Item internal) const { return internal_to_external_[internal]; }
  std::optional<Item> internal_id(Item external) const {
    auto it = external_to_internal_.find(external);
    if (it == external_to_internal_.end()) return std::nullopt;
    return it->second;
  }

  std::int64_t item_support(Item i) const { return static_cast<std::int64_t>(item_tids_[i].size()); }
  std::int64_t item_twu(Item i) const { return item_twu_[i]; }
  const std::vector<Tid>& item_tids(Item i) const { return item_tids_[i]; }
  const std::vector<Word>& item_bitmap(Item i) const { return item_bitmaps_[i]; }
  std::int64_t total_utility() const { return total_utility_; }
  std::size_t words() const { return bitmap_words(transactions_.size()); }

  DatasetStats stats() const {
    DatasetStats s;
    s.transaction_count = n();
    s.item_count = m();
    std::int64_t len = 0;
    for (const auto& t : transactions_) len += static_cast<std::int64_t>(t.size());
    s.avg_transaction_len = n() == 0 ? 0.0 : static_cast<double>(len) / n();
    s.total_utility = total_utility_;
    return s;
  }

  void serialize_plain(std::ostream& out) const {
    for (const auto& t : transactions_) {
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) out << ' ';
        out << external_id(t[i]);
      }
      out << '\n';
    }
  }

  void serialize_utility(std::ostream& out) const {
    for (Tid t = 0; t < n(); ++t) {
      const auto& items = transactions_[t];
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out << ' ';
        out << external_id(items[i]);
      }
      out << ':' << transaction_utilities_[t] << ':';
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out << ' ';
        out << item_utilities_[t][i];
      }
      out << '\n';
    }
  }

 private:
  // Stages raw rows; the enclosing class is incomplete here, so the database
  // itself is only assembled in finish().
  class Builder {
   public:
    explicit Builder(bool utility_mode) : utility_mode_(utility_mode) {}

    void add(int line_no, const std::vector<std::int64_t>& external_ids,
             const std::vector<std::int64_t>& utils) {
      if (external_ids.empty()) parse_fail(line_no, "empty transaction");
      std::vector<Item> internal;
      internal.reserve(external_ids.size());
      for (std::int64_t e : external_ids) {
        if (e > INT32_MAX) parse_fail(line_no, "item id out of range");
        const Item ext = static_cast<Item>(e);
        auto [it, inserted] = external_to_internal_.try_emplace(
            ext, static_cast<Item>(internal_to_external_.size()));
        if (inserted) internal_to_external_.push_back(ext);
        internal.push_back(it->second);
      }
      std::vector<std::size_t> order(internal.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) { return internal[a] < internal[b]; });
      std::vector<Item> sorted_items(internal.size());
      for (std::size_t i = 0; i < order.size(); ++i) sorted_items[i] = internal[order[i]];
      transactions_.push_back(std::move(sorted_items));
      if (utility_mode_) {
        std::vector<std::int64_t> sorted_utils(order.size());
        for (std::size_t i = 0; i < order.size(); ++i) sorted_utils[i] = utils[order[i]];
        const std::int64_t tu =
            std::accumulate(sorted_utils.begin(), sorted_utils.end(), std::int64_t{0});
        item_utilities_.push_back(std::move(sorted_utils));
        transaction_utilities_.push_back(tu);
      }
    }

    TransactionDatabase finish() {
      if (transactions_.empty()) throw std::runtime_error("dataset has no transactions");
      TransactionDatabase db;
      db.utility_mode_ = utility_mode_;
      db.transactions_ = std::move(transactions_);
      db.internal_to_external_ = std::move(internal_to_external_);
      db.external_to_internal_ = std::move(external_to_internal_);
      if (utility_mode_) {
        db.item_utilities_ = std::move(item_utilities_);
        db.transaction_utilities_ = std::move(transaction_utilities_);
      } else {
        db.item_utilities_.assign(db.transactions_.size(), {});
        db.transaction_utilities_.assign(db.transactions_.size(), 0);
      }
      db.build_index();
      return db;
    }

   private:
    bool utility_mode_;
    std::vector<std::vector<Item>> transactions_;
    std::vector<std::vector<std::int64_t>> item_utilities_;
    std::vector<std::int64_t> transaction_utilities_;
    std::vector<Item> internal_to_external_;
    std::unordered_map<Item, Item> external_to_internal_;
  };

  static void strip_cr(std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  }

  static bool is_blank(const std::string& s) {
    return s.find_first_not_of(" \t") == std::string::npos;
  }

  [[noreturn]] static void parse_fail(int line_no, const std::string& what) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": " + what);
  }

  static std::vector<std::int64_t> parse_ints(const std::string& part, int line_no,
                                              const char* what) {
    std::istringstream iss(part);
    std::vector<std::int64_t> out;
    std::int64_t v;
    while (iss >> v) out.push_back(v);
    if (!iss.eof())
      parse_fail(line_no, std::string("invalid ") + what + " token");
    return out;
  }

  static void dedup_preserving_order(std::vector<std::int64_t>& ids) {
    std::vector<std::int64_t> out;
    out.reserve(ids.size());
    for (std::int64_t v : ids)
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    ids = std::move(out);
  }

  void build_index() {
    const std::size_t w = bitmap_words(transactions_.size());
    item_tids_.assign(internal_to_external_.size(), {});
    item_bitmaps_.assign(internal_to_external_.size(), std::vector<Word>(w, 0));
    item_twu_.assign(internal_to_external_.size(), 0);
    for (Tid t = 0; t < n(); ++t) {
      for (Item i : transactions_[t]) {
        item_tids_[i].push_back(t);
        bitmap_set(item_bitmaps_[i], static_cast<std::size_t>(t));
        item_twu_[i] += transaction_utilities_[t];
      }
    }
    total_utility_ =
        std::accumulate(transaction_utilities_.begin(), transaction_utilities_.end(),
                        std::int64_t{0});
  }

  bool utility_mode_ = false;
  std::vector<std::vector<Item>> transactions_;
  std::vector<std::vector<std::int64_t>> item_utilities_;
  std::vector<std::int64_t> transaction_utilities_;
  std::vector<Item> internal_to_external_;
  std::unordered_map<Item, Item> external_to_internal_;
  std::vector<std::vector<Tid>> item_tids_;
  std::vector<std::vector<Word>> item_bitmaps_;
  std::vector<std::int64_t> item_twu_;
  std::int64_t total_utility_ = 0;
};

// --- relative thresholds ----------------------------------------------------

// A percentage parsed as an exact decimal: value% = num / (den * 100).
// Keeping it rational avoids float rounding at case boundaries.
struct Percent {
  std::int64_t num = 0;
  std::int64_t den = 1;
};

inline Percent parse_percent(const std::string& s) {
  std::int64_t num = 0, den = 1;
  bool any_digit = false, seen_dot = false;
  for (char c : s) {
    if (c == '.') {
      if (seen_dot) throw std::runtime_error("invalid percentage: " + s);
      seen_dot = true;
    } else if (c >= '0' && c <= '9') {
      num = num * 10 + (c - '0');
      if (seen_dot) den *= 10;
      any_digit = true;
      if (num > INT64_MAX / 1000) throw std::runtime_error("percentage out of range: " + s);
    } else {
      throw std::runtime_error("invalid percentage: " + s);
    }
  }
  if (!any_digit) throw std::runtime_error("invalid percentage: " + s);
  return {num, den};
}

// ceil(total * pct / 100) in integer arithmetic.
inline std::int64_t absolute_threshold(std::int64_t total, Percent pct) {
  const std::int64_t d = pct.den * 100;
  return (total * pct.num + d - 1) / d;
}

// --- item pruning and partitioning ------------------------------------------

struct PrunedDatabase {
  TransactionDatabase db;
  std::vector<Item> kept;  // new internal id -> internal id in the source db
};

// Removes items that cannot take part in any result: support < threshold for
// FI/AR, transaction-weighted utility < threshold for HUI. Transactions left
// empty are dropped.
inline PrunedDatabase prune_items(const TransactionDatabase& db, Task task,
                                  std::int64_t threshold) {
  std::vector<bool> keep(db.m(), false);
  for (Item i = 0; i < db.m(); ++i) {
    const std::int64_t v = task == Task::kHui ? db.item_twu(i) : db.item_support(i);
    keep[i] = v >= threshold;
  }
  std::vector<std::vector<std::int64_t>> txs;
  std::vector<std::vector<std::int64_t>> utils;
  for (Tid t = 0; t < db.n(); ++t) {
    std::vector<std::int64_t> ids, us;
    const auto& items = db.transaction(t);
    for (std::size_t k = 0; k < items.size(); ++k) {
      if (!keep[items[k]]) continue;
      ids.push_back(db.external_id(items[k]));
      if (db.utility_mode()) us.push_back(db.transaction_item_utilities(t)[k]);
    }
    if (ids.empty()) continue;
    txs.push_back(std::move(ids));
    if (db.utility_mode()) utils.push_back(std::move(us));
  }
  if (txs.empty())
    throw std::runtime_error("no candidate items at this threshold; lower it");
  PrunedDatabase out{TransactionDatabase::from_transactions(txs, utils), {}};
  out.kept.resize(out.db.m());
  for (Item i = 0; i < out.db.m(); ++i)
    out.kept[i] = *db.internal_id(out.db.external_id(i));
  return out;
}

// First floor(fraction * n) transactions in file order form the source
// partition, the rest the target partition.
inline std::pair<TransactionDatabase, TransactionDatabase> split_source_target(
    const TransactionDatabase& db, double fraction = 0.6) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::runtime_error("split fraction must be in (0, 1)");
  const Tid n_src = static_cast<Tid>(fraction * db.n());
  if (n_src == 0 || n_src == db.n())
    throw std::runtime_error("split would leave an empty partition");
  auto slice = [&](Tid lo, Tid hi) {
    std::vector<std::vector<std::int64_t>> txs, utils;
    for (Tid t = lo; t < hi; ++t) {
      std::vector<std::int64_t> ids;
      for (Item i : db.transaction(t)) ids.push_back(db.external_id(i));
      txs.push_back(std::move(ids));
      if (db.utility_mode()) utils.push_back(db.transaction_item_utilities(t));
    }
    return TransactionDatabase::from_transactions(txs, utils);
  };
  return {slice(0, n_src), slice(n_src, db.n())};
}

}  // namespace rlminer
