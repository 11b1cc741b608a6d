#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rlminer {

using Item = std::int32_t;
using Tid = std::int32_t;
using Word = std::uint64_t;

// Mining target type: high-utility itemsets, frequent itemsets, association
// rules.
enum class Task { kHui, kFi, kAr };

inline const char* task_name(Task t) {
  switch (t) {
    case Task::kHui: return "hui";
    case Task::kFi: return "fi";
    case Task::kAr: return "ar";
  }
  throw std::logic_error("unknown task");
}

inline Task task_from_name(const std::string& s) {
  if (s == "hui") return Task::kHui;
  if (s == "fi") return Task::kFi;
  if (s == "ar") return Task::kAr;
  throw std::runtime_error("unknown task: " + s);
}

// An itemset, or a single-consequent association rule when consequent >= 0.
// For rules `items` holds the antecedent. Item ids are context-dependent
// (internal during mining, external in files); `items` is sorted ascending.
struct Pattern {
  std::vector<Item> items;
  Item consequent = kNoConsequent;

  static constexpr Item kNoConsequent = -1;

  bool is_rule() const { return consequent >= 0; }

  friend bool operator==(const Pattern&, const Pattern&) = default;
  friend auto operator<=>(const Pattern&, const Pattern&) = default;
};

// A pattern together with its measured value: support for itemsets (union
// support for rules) or utility, plus the antecedent support a rule's
// confidence is taken against.
struct ScoredPattern {
  Pattern pattern;
  std::int64_t measure = 0;
  std::int64_t antecedent_support = 0;

  double confidence() const {
    return antecedent_support > 0
               ? static_cast<double>(measure) / static_cast<double>(antecedent_support)
               : 0.0;
  }

  friend bool operator==(const ScoredPattern&, const ScoredPattern&) = default;
};

struct PatternHash {
  std::size_t operator()(const Pattern& p) const {
    std::size_t h = 1469598103934665603ull;
    auto mix = [&h](std::size_t v) {
      h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    };
    for (Item i : p.items) mix(static_cast<std::size_t>(i));
    mix(static_cast<std::size_t>(p.consequent) + 0x517cc1b727220a95ull);
    return h;
  }
};

// --- dense bitmap over transaction ids -------------------------------------

inline std::size_t bitmap_words(std::size_t bits) { return (bits + 63) / 64; }

inline void bitmap_set(std::vector<Word>& bm, std::size_t pos) {
  bm[pos >> 6] |= Word{1} << (pos & 63);
}

inline bool bitmap_test(const std::vector<Word>& bm, std::size_t pos) {
  return (bm[pos >> 6] >> (pos & 63)) & 1;
}

// All `bits` low positions set, tail bits clear.
inline std::vector<Word> bitmap_full(std::size_t bits) {
  std::vector<Word> bm(bitmap_words(bits), ~Word{0});
  if (!bm.empty() && (bits & 63) != 0)
    bm.back() = (Word{1} << (bits & 63)) - 1;
  return bm;
}

// dst &= src; returns true if dst has any bit left.
inline bool bitmap_and_into(std::vector<Word>& dst, const std::vector<Word>& src) {
  Word any = 0;
  for (std::size_t w = 0; w < dst.size(); ++w) {
    dst[w] &= src[w];
    any |= dst[w];
  }
  return any != 0;
}

inline std::int64_t bitmap_count(const std::vector<Word>& bm) {
  std::int64_t c = 0;
  for (Word w : bm) c += __builtin_popcountll(w);
  return c;
}

inline std::int64_t bitmap_count_and(const std::vector<Word>& a,
                                     const std::vector<Word>& b) {
  std::int64_t c = 0;
  for (std::size_t w = 0; w < a.size(); ++w)
    c += __builtin_popcountll(a[w] & b[w]);
  return c;
}

template <typename Fn>
inline void bitmap_for_each(const std::vector<Word>& bm, Fn&& fn) {
  for (std::size_t w = 0; w < bm.size(); ++w) {
    Word bits = bm[w];
    while (bits) {
      int b = __builtin_ctzll(bits);
      fn(static_cast<Tid>(w * 64 + b));
      bits &= bits - 1;
    }
  }
}

}  // namespace rlminer
