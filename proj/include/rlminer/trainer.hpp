#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rlminer/agent.hpp"
#include "rlminer/dataset.hpp"
#include "rlminer/environment.hpp"
#include "rlminer/measures.hpp"
#include "rlminer/optimizer.hpp"
#include "rlminer/qnetwork.hpp"
#include "rlminer/rng.hpp"

namespace rlminer {

// Everything one training run depends on besides the database and the
// thresholds. `defaults(task, agent)` resolves the per-task episode budget,
// network shape and fusion schedule.
struct RunConfig {
  Task task = Task::kFi;
  AgentKind agent = AgentKind::kFusion;
  std::uint64_t seed = 1;
  int episodes = 1000;          // E
  int steps_per_episode = 500;  // K
  std::size_t replay_capacity = 10000;
  int batch_size = 512;
  double gamma = 0.95;
  int target_sync_period = 5;  // episodes between target-network syncs
  double learning_rate = 0.001;
  double grad_clip_norm = 0.0;
  DecaySchedule eps_schedule{0.9, 0.05, 200.0};
  DecaySchedule lambda_schedule{0.999, 0.6, 200.0};
  double heuristic_eps = 0.1;  // fixed exploration of the state-eps agent
  std::vector<int> hidden_widths{4096};
  bool block_batch_norm = true;
  bool input_batch_norm = false;  // rule mining normalizes its 2M input
  double leaky_slope = 0.01;
  double bn_momentum = 0.1;
  double bn_eps = 1e-5;
  bool log_walltime = false;  // wall_ms stays 0 unless asked, to keep logs byte-reproducible

  static RunConfig defaults(Task task, AgentKind agent = AgentKind::kFusion) {
    RunConfig c;
    c.task = task;
    c.agent = agent;
    switch (task) {
      case Task::kHui:
        c.episodes = 500;
        c.hidden_widths = {512, 512, 512};
        c.lambda_schedule = {0.999, 0.5, 200.0};
        c.input_batch_norm = false;
        break;
      case Task::kFi:
        c.episodes = 1000;
        c.hidden_widths = {4096};
        c.lambda_schedule = {0.999, 0.6, 200.0};
        c.input_batch_norm = false;
        break;
      case Task::kAr:
        c.episodes = 1000;
        c.hidden_widths = {512, 512, 512};
        c.lambda_schedule = {0.999, 0.5, 200.0};
        c.input_batch_norm = true;
        break;
    }
    return c;
  }

  NetworkSpec network_spec(Item m) const {
    NetworkSpec s;
    s.input_dim = task == Task::kAr ? 2 * m : m;
    s.output_dim = m + 1;
    s.input_batch_norm = input_batch_norm;
    s.bn_momentum = bn_momentum;
    s.bn_eps = bn_eps;
    for (int w : hidden_widths) s.blocks.push_back({w, block_batch_norm, leaky_slope});
    return s;
  }

  void validate() const {
    if (episodes < 1) throw std::runtime_error("episodes must be >= 1");
    if (steps_per_episode < 1) throw std::runtime_error("steps per episode must be >= 1");
    if (target_sync_period < 1) throw std::runtime_error("target sync period must be >= 1");
    if (gamma < 0.0 || gamma > 1.0) throw std::runtime_error("gamma must be in [0, 1]");
    if (agent_uses_network(agent)) {
      if (batch_size < 2)
        throw std::runtime_error("batch size must be >= 2 (batch normalization)");
      if (replay_capacity < static_cast<std::size_t>(batch_size))
        throw std::runtime_error("replay capacity below batch size never trains");
      if (hidden_widths.empty()) throw std::runtime_error("no hidden blocks configured");
    }
  }
};

struct EpisodeLog {
  int episode = 0;
  int extracted_this_episode = 0;  // counts repeats, matching the per-episode plots
  std::int64_t cumulative_unique = 0;
  double mean_reward = 0.0;
  double loss_mean = 0.0;  // 0 when no update ran this episode
  std::int64_t wall_ms = 0;
};

// Final online/target networks plus optimizer and rng state; everything
// needed to resume or transfer.
struct AgentSnapshot {
  QNetwork network;
  QNetwork target;
  RAdam optimizer;
  std::int64_t k_total = 0;
  std::string rng_state;
};

struct MiningResult {
  std::vector<ScoredPattern> patterns;  // canonically sorted
  std::vector<EpisodeLog> logs;
  // Global step index of each first-time extraction, in extraction order.
  std::vector<std::int64_t> extraction_steps;
  std::int64_t total_pushes = 0;
  std::optional<AgentSnapshot> agent;
};

// Steps needed until `target_count` unique patterns had been extracted.
inline std::optional<std::int64_t> total_step_number(const MiningResult& result,
                                                     std::size_t target_count) {
  if (target_count == 0) return 0;
  if (result.extraction_steps.size() < target_count) return std::nullopt;
  return result.extraction_steps[target_count - 1];
}

namespace detail {

inline void verify_extractions(const TransactionDatabase& db,
                               const MeasureConfig& measure,
                               const std::vector<ScoredPattern>& patterns) {
  for (const ScoredPattern& p : patterns) {
    if (measure.task == Task::kAr) {
      std::vector<Item> joint = p.pattern.items;
      joint.insert(std::lower_bound(joint.begin(), joint.end(), p.pattern.consequent),
                   p.pattern.consequent);
      const std::int64_t sup_union = support(db, joint);
      const std::int64_t sup_ant = support(db, p.pattern.items);
      if (sup_union != p.measure || sup_ant != p.antecedent_support ||
          sup_union < measure.threshold ||
          !measure.confidence_at_least(sup_union, sup_ant))
        throw std::logic_error("extracted rule fails re-scoring");
    } else {
      const std::int64_t value = measure.task == Task::kHui
                                     ? utility(db, p.pattern.items)
                                     : support(db, p.pattern.items);
      if (value != p.measure || value < measure.threshold)
        throw std::logic_error("extracted itemset fails re-scoring");
    }
  }
}

}  // namespace detail

// One full training/mining run: E episodes of K steps, target network synced
// at the end of every target_sync_period-th episode, every qualifying
// itemset recorded. Single-threaded and bit-reproducible for a given seed.
// `initial_net` (e.g. a transferred network) replaces the fresh He
// initialization; the run's rng then skips those draws.
inline MiningResult run(const TransactionDatabase& db, const MeasureConfig& measure,
                        const RunConfig& cfg,
                        std::optional<QNetwork> initial_net = std::nullopt) {
  cfg.validate();
  if (measure.task != cfg.task)
    throw std::runtime_error("measure/run config task mismatch");
  const Item m = db.m();
  Rng rng(cfg.seed);

  MiningResult result;
  PatternSet unique;

  const bool trains = agent_uses_network(cfg.agent);
  std::optional<QNetwork> net, target;
  std::optional<RAdam> opt;
  ReplayMemory memory(cfg.replay_capacity);
  if (trains) {
    if (initial_net) {
      if (!(initial_net->spec() == cfg.network_spec(m)))
        throw std::runtime_error("initial network does not match the run's network spec");
      net.emplace(std::move(*initial_net));
    } else {
      net.emplace(cfg.network_spec(m), rng);
    }
    target.emplace(net->clone());
    opt.emplace(net->parameters(),
                RAdamConfig{cfg.learning_rate, 0.9, 0.999, 1e-8, cfg.grad_clip_norm});
  } else if (initial_net) {
    throw std::runtime_error("initial network given to a training-free agent");
  }
  const bool needs_state = cfg.agent != AgentKind::kRandom;

  const int K = cfg.steps_per_episode;
  for (int e = 0; e < cfg.episodes; ++e) {
    const auto episode_start = std::chrono::steady_clock::now();
    int step_for_error = -1;
    try {
      BitVector bits = random_initialize(db, rng);
      std::vector<double> state;
      if (needs_state) state = compute_state(bits, db, measure);
      PatternSet episode_extracted;
      double reward_sum = 0.0, loss_sum = 0.0;
      int loss_count = 0, extracted_count = 0;

      for (int k = 0; k < K; ++k) {
        step_for_error = k;
        const std::int64_t k_total = static_cast<std::int64_t>(e) * K + k;
        int action = 0;
        switch (cfg.agent) {
          case AgentKind::kRandom:
            action = select_action_random(m, rng);
            break;
          case AgentKind::kStateEps:
            action = select_action_state_eps(state, m, cfg.heuristic_eps, rng);
            break;
          case AgentKind::kStateProb:
            action = select_action_state_prob(state, m, rng);
            break;
          case AgentKind::kBasic: {
            const std::vector<double> q = net->forward_eval_single(state);
            action = select_action_basic(q, m, cfg.eps_schedule.value_at(k_total), rng);
            break;
          }
          case AgentKind::kFusion: {
            const std::vector<double> q = net->forward_eval_single(state);
            const std::vector<double> ext = extend_state(state, cfg.task);
            action = select_action_fusion(q, ext, cfg.lambda_schedule.value_at(k_total),
                                          m, cfg.eps_schedule.value_at(k_total), rng);
            break;
          }
        }

        const BitVector prev = bits;
        bits = apply_action(prev, action, db, rng);
        const StepOutcome out =
            compute_reward(prev, bits, action, db, measure, episode_extracted);
        reward_sum += out.reward;
        if (out.extracted) {
          ++extracted_count;
          if (unique.insert(*out.extracted).second) {
            ScoredPattern sp;
            sp.pattern = *out.extracted;
            sp.measure = out.measure_value;
            if (sp.pattern.is_rule())
              sp.antecedent_support = support(db, sp.pattern.items);
            result.patterns.push_back(std::move(sp));
            result.extraction_steps.push_back(k_total);
          }
        }

        if (trains || needs_state) {
          std::vector<double> next_state = compute_state(bits, db, measure);
          if (trains) {
            memory.push({std::move(state), action, out.reward, next_state});
            ++result.total_pushes;
            if (auto loss = train_step(*net, *target, memory, *opt, cfg.gamma,
                                       cfg.batch_size, rng)) {
              loss_sum += *loss;
              ++loss_count;
            }
          }
          state = std::move(next_state);
        }
      }

      step_for_error = -1;
      if (trains && (e + 1) % cfg.target_sync_period == 0) net->copy_into(*target);

      EpisodeLog log;
      log.episode = e;
      log.extracted_this_episode = extracted_count;
      log.cumulative_unique = static_cast<std::int64_t>(unique.size());
      log.mean_reward = reward_sum / K;
      log.loss_mean = loss_count > 0 ? loss_sum / loss_count : 0.0;
      if (cfg.log_walltime) {
        log.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - episode_start)
                          .count();
      }
      result.logs.push_back(log);
    } catch (const std::exception& ex) {
      throw std::runtime_error("episode " + std::to_string(e) +
                               (step_for_error >= 0
                                    ? " step " + std::to_string(step_for_error)
                                    : std::string()) +
                               ": " + ex.what());
    }
  }

  detail::verify_extractions(db, measure, result.patterns);
  std::sort(result.patterns.begin(), result.patterns.end(),
            [](const ScoredPattern& a, const ScoredPattern& b) {
              return a.pattern < b.pattern;
            });

  if (trains) {
    result.agent.emplace(AgentSnapshot{std::move(*net), std::move(*target),
                                       std::move(*opt),
                                       static_cast<std::int64_t>(cfg.episodes) * K,
                                       rng.serialize()});
  }
  return result;
}

// --- hyperparameter sweep ----------------------------------------------------

// Per-axis sweep: each (parameter, value) cell is run `repeats` times with
// distinct seeds. Cells run in parallel across `workers` threads; results
// land in fixed slots so the report does not depend on scheduling.
struct SweepRun {
  std::string param;
  double value = 0.0;
  int repeat = 0;
  std::uint64_t seed = 0;
  std::int64_t unique_count = 0;
  std::optional<std::int64_t> total_steps;
};

inline void apply_sweep_param(RunConfig& cfg, const std::string& key, double value) {
  if (key == "gamma") cfg.gamma = value;
  else if (key == "learning_rate") cfg.learning_rate = value;
  else if (key == "target_sync_period") cfg.target_sync_period = static_cast<int>(value);
  else if (key == "episodes") cfg.episodes = static_cast<int>(value);
  else if (key == "steps_per_episode") cfg.steps_per_episode = static_cast<int>(value);
  else if (key == "batch_size") cfg.batch_size = static_cast<int>(value);
  else if (key == "replay_capacity") cfg.replay_capacity = static_cast<std::size_t>(value);
  else if (key == "heuristic_eps") cfg.heuristic_eps = value;
  else if (key == "grad_clip_norm") cfg.grad_clip_norm = value;
  else if (key == "eps_start") cfg.eps_schedule.start = value;
  else if (key == "eps_end") cfg.eps_schedule.end = value;
  else if (key == "eps_const") cfg.eps_schedule = DecaySchedule::constant(value);
  else if (key == "lambda_start") cfg.lambda_schedule.start = value;
  else if (key == "lambda_end") cfg.lambda_schedule.end = value;
  else if (key == "lambda_const") cfg.lambda_schedule = DecaySchedule::constant(value);
  else throw std::runtime_error("unknown sweep parameter: " + key);
}

inline std::vector<SweepRun> sweep(
    const TransactionDatabase& db, const MeasureConfig& measure,
    const RunConfig& base,
    const std::vector<std::pair<std::string, std::vector<double>>>& grid,
    int repeats, std::optional<std::size_t> target_count = std::nullopt,
    unsigned workers = 1) {
  if (repeats < 1) throw std::runtime_error("sweep repeats must be >= 1");
  std::vector<SweepRun> runs;
  std::uint64_t next_seed = base.seed;
  for (const auto& [param, values] : grid) {
    for (double value : values) {
      RunConfig probe = base;
      apply_sweep_param(probe, param, value);  // unknown keys fail before running
      for (int rep = 0; rep < repeats; ++rep)
        runs.push_back({param, value, rep, next_seed++, 0, std::nullopt});
    }
  }

  std::atomic<std::size_t> cursor{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= runs.size()) return;
      try {
        RunConfig cfg = base;
        apply_sweep_param(cfg, runs[i].param, runs[i].value);
        cfg.seed = runs[i].seed;
        const MiningResult r = run(db, measure, cfg);
        runs[i].unique_count = static_cast<std::int64_t>(r.patterns.size());
        if (target_count) runs[i].total_steps = total_step_number(r, *target_count);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return runs;
}

}  // namespace rlminer
