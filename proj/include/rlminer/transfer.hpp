#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rlminer/dataset.hpp"
#include "rlminer/measures.hpp"
#include "rlminer/qnetwork.hpp"
#include "rlminer/trainer.hpp"

namespace rlminer {

// Item correspondence between two databases, joined on external ids.
struct ItemAlignment {
  std::vector<std::pair<Item, Item>> shared;  // (source internal, target internal)
  std::vector<Item> source_only;
  std::vector<Item> target_only;
};

inline ItemAlignment align_items(const TransactionDatabase& src,
                                 const TransactionDatabase& tgt) {
  ItemAlignment al;
  for (Item i = 0; i < src.m(); ++i) {
    if (auto t = tgt.internal_id(src.external_id(i)))
      al.shared.emplace_back(i, *t);
    else
      al.source_only.push_back(i);
  }
  for (Item j = 0; j < tgt.m(); ++j)
    if (!src.internal_id(tgt.external_id(j))) al.target_only.push_back(j);
  return al;
}

namespace detail {

inline void reset_bn_running_stats(nn::BatchNorm& bn) {
  std::fill(bn.run_mean.begin(), bn.run_mean.end(), 0.0);
  std::fill(bn.run_var.begin(), bn.run_var.end(), 1.0);
}

}  // namespace detail

// Rebuilds a trained network for a new item vocabulary. Hidden blocks carry
// over verbatim (weights, biases, batch-norm parameters and running stats).
// The first layer keeps each shared item's input column and the output layer
// keeps each shared item's action row plus the vocabulary-independent
// reinitialize row; weights for target-only items keep their fresh He
// initialization, and source-only ones are dropped. Rule-mining networks map
// both halves of the doubled input, including the input batch-norm
// dimensions. The caller builds a fresh optimizer.
inline QNetwork transfer_network(const QNetwork& src, const ItemAlignment& alignment,
                                 const NetworkSpec& tgt_spec, Task task, Rng& rng,
                                 bool reset_bn_stats = false) {
  const NetworkSpec& ss = src.spec();
  if (ss.blocks.empty() || tgt_spec.blocks.empty())
    throw std::runtime_error("transfer needs at least one hidden block");
  if (ss.blocks != tgt_spec.blocks)
    throw std::runtime_error("hidden block mismatch between source and target specs");
  if (ss.input_batch_norm != tgt_spec.input_batch_norm)
    throw std::runtime_error("input batch-norm mismatch between source and target specs");
  const int halves = task == Task::kAr ? 2 : 1;
  const Item m_src = static_cast<Item>(ss.output_dim - 1);
  const Item m_tgt = static_cast<Item>(tgt_spec.output_dim - 1);
  if (ss.input_dim != halves * m_src || tgt_spec.input_dim != halves * m_tgt)
    throw std::runtime_error("network spec dimensions do not fit the task");
  if (alignment.shared.size() + alignment.source_only.size() !=
          static_cast<std::size_t>(m_src) ||
      alignment.shared.size() + alignment.target_only.size() !=
          static_cast<std::size_t>(m_tgt))
    throw std::runtime_error("alignment does not partition the vocabularies");

  QNetwork tgt(tgt_spec, rng);

  // Hidden blocks after the first are vocabulary-independent.
  for (std::size_t b = 1; b < tgt.hidden_blocks().size(); ++b)
    tgt.hidden_blocks()[b] = src.hidden_blocks()[b];
  // First block: the post-FC part is vocabulary-independent too; only the FC
  // input columns depend on items.
  tgt.hidden_blocks()[0].bn = src.hidden_blocks()[0].bn;
  tgt.hidden_blocks()[0].slope = src.hidden_blocks()[0].slope;
  nn::Linear& fc_tgt = tgt.hidden_blocks()[0].fc;
  const nn::Linear& fc_src = src.hidden_blocks()[0].fc;
  fc_tgt.b = fc_src.b;
  for (int h = 0; h < halves; ++h) {
    for (const auto& [is, it] : alignment.shared) {
      const std::size_t cs = static_cast<std::size_t>(h) * m_src + is;
      const std::size_t ct = static_cast<std::size_t>(h) * m_tgt + it;
      for (int r = 0; r < fc_tgt.out; ++r)
        fc_tgt.w.v[static_cast<std::size_t>(r) * fc_tgt.in + ct] =
            fc_src.w.v[static_cast<std::size_t>(r) * fc_src.in + cs];
    }
  }

  nn::Linear& out_tgt = tgt.output_layer();
  const nn::Linear& out_src = src.output_layer();
  auto copy_row = [&](Item rs, Item rt) {
    for (int c = 0; c < out_tgt.in; ++c)
      out_tgt.w.v[static_cast<std::size_t>(rt) * out_tgt.in + c] =
          out_src.w.v[static_cast<std::size_t>(rs) * out_src.in + c];
    out_tgt.b.v[static_cast<std::size_t>(rt)] = out_src.b.v[static_cast<std::size_t>(rs)];
  };
  for (const auto& [is, it] : alignment.shared) copy_row(is, it);
  copy_row(m_src, m_tgt);  // the reinitialize action is item-independent

  if (tgt.input_bn()) {
    nn::BatchNorm& bt = *tgt.input_bn();
    const nn::BatchNorm& bs = *src.input_bn();
    for (int h = 0; h < halves; ++h) {
      for (const auto& [is, it] : alignment.shared) {
        const std::size_t ds = static_cast<std::size_t>(h) * m_src + is;
        const std::size_t dt = static_cast<std::size_t>(h) * m_tgt + it;
        bt.gamma.v[dt] = bs.gamma.v[ds];
        bt.beta.v[dt] = bs.beta.v[ds];
        bt.run_mean[dt] = bs.run_mean[ds];
        bt.run_var[dt] = bs.run_var[ds];
      }
    }
  }

  if (reset_bn_stats) {
    if (tgt.input_bn()) detail::reset_bn_running_stats(*tgt.input_bn());
    for (auto& blk : tgt.hidden_blocks())
      if (blk.bn) detail::reset_bn_running_stats(*blk.bn);
  }
  return tgt;
}

// Fusion-weight schedules used around a transfer; the source run leans on
// learned Q-values where the target run can, and vice versa per task.
inline DecaySchedule transfer_lambda_source(Task task) {
  switch (task) {
    case Task::kHui: return {0.999, 0.5, 200.0};
    case Task::kFi: return {0.999, 0.6, 200.0};
    case Task::kAr: return DecaySchedule::constant(0.5);
  }
  throw std::logic_error("unknown task");
}

inline DecaySchedule transfer_lambda_target(Task task) {
  switch (task) {
    case Task::kHui: return DecaySchedule::constant(0.5);
    case Task::kFi: return {0.999, 0.6, 200.0};
    case Task::kAr: return {0.999, 0.5, 200.0};
  }
  throw std::logic_error("unknown task");
}

struct TransferConfig {
  Task task = Task::kHui;
  Percent threshold{};  // per-partition, against its own size/total utility
  std::optional<std::int64_t> abs_threshold;  // overrides `threshold` when set
  Percent min_conf{};                         // rules only
  double split_fraction = 0.6;
  std::uint64_t seed = 1;
  RunConfig base;  // episode/step/training budget shared by all three runs
  bool reset_bn_stats = false;
};

struct TransferOutcome {
  ItemAlignment alignment;
  MiningResult source, target, scratch;
  Item source_m = 0, target_m = 0;
  std::int64_t source_threshold = 0, target_threshold = 0;
};

namespace detail {

inline std::int64_t partition_threshold(const TransactionDatabase& db,
                                        const TransferConfig& cfg) {
  if (cfg.abs_threshold) return *cfg.abs_threshold;
  const std::int64_t base =
      cfg.task == Task::kHui ? db.total_utility() : static_cast<std::int64_t>(db.n());
  return absolute_threshold(base, cfg.threshold);
}

inline MeasureConfig partition_measure(const TransferConfig& cfg, std::int64_t threshold) {
  switch (cfg.task) {
    case Task::kHui: return MeasureConfig::hui(threshold);
    case Task::kFi: return MeasureConfig::fi(threshold);
    case Task::kAr: return MeasureConfig::ar(threshold, cfg.min_conf);
  }
  throw std::logic_error("unknown task");
}

}  // namespace detail

// Full transfer study on one database: train on the source partition,
// remap the agent onto the target partition and retrain, and train a
// from-scratch reference on the target with the same budget. Seeds: source
// uses cfg.seed; the target and scratch runs share cfg.seed + 1, and the
// transfer's fresh weights draw from cfg.seed + 2.
inline TransferOutcome transfer_experiment(const TransactionDatabase& db,
                                           const TransferConfig& cfg) {
  if (!agent_uses_network(cfg.base.agent))
    throw std::runtime_error("transfer needs a training agent");
  const auto [src_raw, tgt_raw] = split_source_target(db, cfg.split_fraction);
  const std::int64_t xi_src = detail::partition_threshold(src_raw, cfg);
  const std::int64_t xi_tgt = detail::partition_threshold(tgt_raw, cfg);
  const PrunedDatabase src_p = prune_items(src_raw, cfg.task, xi_src);
  const PrunedDatabase tgt_p = prune_items(tgt_raw, cfg.task, xi_tgt);
  const MeasureConfig measure_src = detail::partition_measure(cfg, xi_src);
  const MeasureConfig measure_tgt = detail::partition_measure(cfg, xi_tgt);

  TransferOutcome out;
  out.source_m = src_p.db.m();
  out.target_m = tgt_p.db.m();
  out.source_threshold = xi_src;
  out.target_threshold = xi_tgt;

  RunConfig rc_src = cfg.base;
  rc_src.task = cfg.task;
  rc_src.seed = cfg.seed;
  rc_src.lambda_schedule = transfer_lambda_source(cfg.task);
  out.source = run(src_p.db, measure_src, rc_src);

  out.alignment = align_items(src_p.db, tgt_p.db);

  RunConfig rc_tgt = rc_src;
  rc_tgt.seed = cfg.seed + 1;
  rc_tgt.lambda_schedule = transfer_lambda_target(cfg.task);
  Rng transfer_rng(cfg.seed + 2);
  QNetwork transferred =
      transfer_network(out.source.agent->network, out.alignment,
                       rc_tgt.network_spec(tgt_p.db.m()), cfg.task, transfer_rng,
                       cfg.reset_bn_stats);
  out.target = run(tgt_p.db, measure_tgt, rc_tgt, std::move(transferred));

  RunConfig rc_scratch = rc_tgt;
  rc_scratch.lambda_schedule = RunConfig::defaults(cfg.task).lambda_schedule;
  out.scratch = run(tgt_p.db, measure_tgt, rc_scratch);

  return out;
}

}  // namespace rlminer
