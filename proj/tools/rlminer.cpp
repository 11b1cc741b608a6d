// Command-line surface for the miner: train-and-extract (mine), exhaustive
// ground truth (baseline), result comparison (compare), agent transfer
// between dataset partitions (transfer), and hyperparameter sweeps (sweep).
//
// Exit codes: 0 success, 1 runtime failure, 2 bad arguments.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rlminer/agent.hpp"
#include "rlminer/dataset.hpp"
#include "rlminer/io.hpp"
#include "rlminer/measures.hpp"
#include "rlminer/oracle.hpp"
#include "rlminer/trainer.hpp"
#include "rlminer/transfer.hpp"

namespace {

using namespace rlminer;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitArgs = 2;

struct DataArgs {
  std::string task = "fi";
  std::string data;
  bool utility_format = false;
  std::string threshold;           // percentage, e.g. "29.0"
  std::int64_t threshold_abs = 0;  // 0 = unset
  std::string conf;                // rules: minimum confidence percentage
};

void add_data_options(CLI::App* sub, DataArgs& a) {
  sub->add_option("--task", a.task, "mining task: hui, fi or ar")
      ->check(CLI::IsMember({"hui", "fi", "ar"}))
      ->required();
  sub->add_option("--data", a.data, "transaction database file")->required();
  sub->add_flag("--utility-format", a.utility_format,
                "input uses the utility format (implied by --task hui)");
  sub->add_option("--threshold", a.threshold,
                  "minimum support/utility as a percentage of the database");
  sub->add_option("--threshold-abs", a.threshold_abs,
                  "minimum support/utility as an absolute value (bypasses --threshold)");
  sub->add_option("--conf", a.conf, "minimum rule confidence percentage (ar only)");
}

// Argument-level checks that CLI11 cannot express; throws CLI::ValidationError
// so they exit with code 2 like other argument errors.
void validate_data_args(const DataArgs& a) {
  if (a.threshold.empty() && a.threshold_abs == 0)
    throw CLI::ValidationError("--threshold", "either --threshold or --threshold-abs is required");
  if (a.task == "ar" && a.conf.empty())
    throw CLI::ValidationError("--conf", "--conf is required for --task ar");
  if (a.task != "ar" && !a.conf.empty())
    throw CLI::ValidationError("--conf", "--conf only applies to --task ar");
}

TransactionDatabase load_database(const DataArgs& a, Task task) {
  const bool utility = task == Task::kHui || a.utility_format;
  return utility ? TransactionDatabase::load_utility_file(a.data)
                 : TransactionDatabase::load_plain_file(a.data);
}

std::int64_t resolve_threshold(const TransactionDatabase& db, Task task,
                               const DataArgs& a) {
  if (a.threshold_abs != 0) {
    if (a.threshold_abs < 1)
      throw std::runtime_error("absolute threshold must be >= 1");
    return a.threshold_abs;
  }
  const Percent pct = parse_percent(a.threshold);
  const std::int64_t base =
      task == Task::kHui ? db.total_utility() : static_cast<std::int64_t>(db.n());
  return absolute_threshold(base, pct);
}

MeasureConfig build_measure(Task task, std::int64_t threshold, const DataArgs& a) {
  switch (task) {
    case Task::kHui: return MeasureConfig::hui(threshold);
    case Task::kFi: return MeasureConfig::fi(threshold);
    case Task::kAr: return MeasureConfig::ar(threshold, parse_percent(a.conf));
  }
  throw std::logic_error("unknown task");
}

nlohmann::json parse_json_file(const std::string& path) {
  return nlohmann::json::parse(read_text_file(path));
}

// Tables report coverage with one decimal, truncated.
std::string coverage_percent(std::size_t found, std::size_t total) {
  const std::int64_t tenths =
      static_cast<std::int64_t>(found) * 1000 / static_cast<std::int64_t>(total);
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10) + "%";
}

unsigned worker_count() {
  if (const char* env = std::getenv("RLMINER_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return 1;
}

struct MineArgs {
  DataArgs data;
  std::string agent = "fusion";
  int episodes = 0;  // 0 = per-task default
  int steps = 0;
  std::uint64_t seed = 1;
  std::string out;
  std::string config_path;
  std::string preset;
  bool log_walltime = false;
};

RunConfig build_run_config(Task task, const std::string& agent_name, int episodes,
                           int steps, std::uint64_t seed,
                           const std::string& config_path, const std::string& preset,
                           bool log_walltime) {
  const AgentKind agent = agent_from_name(agent_name);
  RunConfig cfg = RunConfig::defaults(task, agent);
  if (!config_path.empty()) cfg = run_config_from_json(parse_json_file(config_path), cfg);
  if (preset == "published") {
    // Pin the hyperparameter set the reference experiments used; only
    // budget, seed and agent stay caller-controlled.
    RunConfig pinned = RunConfig::defaults(task, agent);
    pinned.log_walltime = cfg.log_walltime;
    cfg = pinned;
  }
  cfg.task = task;
  cfg.agent = agent;
  cfg.seed = seed;
  if (episodes > 0) cfg.episodes = episodes;
  if (steps > 0) cfg.steps_per_episode = steps;
  if (log_walltime) cfg.log_walltime = true;
  return cfg;
}

int cmd_mine(const MineArgs& a) {
  const Task task = task_from_name(a.data.task);
  const TransactionDatabase raw = load_database(a.data, task);
  const std::int64_t threshold = resolve_threshold(raw, task, a.data);
  const PrunedDatabase pruned = prune_items(raw, task, threshold);
  const MeasureConfig measure = build_measure(task, threshold, a.data);
  const RunConfig cfg = build_run_config(task, a.agent, a.episodes, a.steps, a.seed,
                                         a.config_path, a.preset, a.log_walltime);

  const auto t0 = std::chrono::steady_clock::now();
  const MiningResult result = run(pruned.db, measure, cfg);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();

  std::filesystem::create_directories(a.out);
  const auto dir = std::filesystem::path(a.out);
  {
    std::ofstream os(dir / "itemsets.txt", std::ios::binary);
    write_pattern_file(os, pruned.db, result.patterns, task);
  }
  {
    std::ofstream os(dir / "episodes.csv", std::ios::binary);
    write_episode_csv(os, result.logs);
  }
  {
    nlohmann::json j = run_config_to_json(cfg);
    j["threshold"] = threshold;
    if (task == Task::kAr) j["min_conf"] = a.data.conf;
    j["data"] = a.data.data;
    write_text_file((dir / "run_config.json").string(), j.dump(2) + "\n");
  }
  if (result.agent) {
    write_text_file((dir / "agent.json").string(),
                    agent_snapshot_to_json(*result.agent).dump() + "\n");
  }
  std::cout << "extracted " << result.patterns.size() << " unique patterns in "
            << ms << " ms\n";
  return kExitOk;
}

struct BaselineArgs {
  DataArgs data;
  std::string out;
  std::size_t candidate_cap = kDefaultCandidateCap;
};

int cmd_baseline(const BaselineArgs& a) {
  const Task task = task_from_name(a.data.task);
  const TransactionDatabase raw = load_database(a.data, task);
  const std::int64_t threshold = resolve_threshold(raw, task, a.data);
  const PrunedDatabase pruned = prune_items(raw, task, threshold);
  const MeasureConfig measure = build_measure(task, threshold, a.data);

  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<ScoredPattern> patterns =
      mine_exhaustive(pruned.db, measure, a.candidate_cap);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();

  std::ofstream os(a.out, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + a.out + " for writing");
  write_pattern_file(os, pruned.db, patterns, task);
  std::cout << "found " << patterns.size() << " patterns in " << ms << " ms\n";
  return kExitOk;
}

struct CompareArgs {
  std::string task = "fi";
  std::string result;
  std::string baseline;
};

int cmd_compare(const CompareArgs& a) {
  const Task task = task_from_name(a.task);
  std::ifstream rs(a.result), bs(a.baseline);
  if (!rs) throw std::runtime_error("cannot open " + a.result);
  if (!bs) throw std::runtime_error("cannot open " + a.baseline);
  const std::vector<ScoredPattern> result = read_pattern_file(rs, task);
  const std::vector<ScoredPattern> baseline = read_pattern_file(bs, task);
  if (baseline.empty()) throw std::runtime_error("baseline file holds no patterns");

  std::unordered_set<Pattern, PatternHash> base_set;
  std::size_t measure_mismatches = 0;
  {
    std::unordered_map<Pattern, std::int64_t, PatternHash> base_measures;
    for (const auto& p : baseline) {
      base_set.insert(p.pattern);
      base_measures.emplace(p.pattern, p.measure);
    }
    for (const auto& p : result) {
      auto it = base_measures.find(p.pattern);
      if (it != base_measures.end() && it->second != p.measure) ++measure_mismatches;
    }
  }
  std::size_t found = 0;
  std::unordered_set<Pattern, PatternHash> seen;
  for (const auto& p : result)
    if (base_set.contains(p.pattern) && seen.insert(p.pattern).second) ++found;

  if (measure_mismatches > 0)
    std::cerr << "warning: " << measure_mismatches
              << " matching patterns disagree on their measured value\n";
  std::cout << found << "/" << baseline.size() << " ("
            << coverage_percent(found, baseline.size()) << ")\n";
  return kExitOk;
}

struct TransferArgs {
  DataArgs data;
  std::string agent = "fusion";
  int episodes = 0;  // 0 = transfer default (500)
  int steps = 0;
  std::uint64_t seed = 1;
  double split = 0.6;
  std::string out;
  std::string config_path;
  std::string preset;
  bool reset_bn_stats = false;
  bool log_walltime = false;
};

int cmd_transfer(const TransferArgs& a) {
  const Task task = task_from_name(a.data.task);
  const TransactionDatabase raw = load_database(a.data, task);

  TransferConfig tc;
  tc.task = task;
  if (a.data.threshold_abs != 0)
    tc.abs_threshold = a.data.threshold_abs;
  else
    tc.threshold = parse_percent(a.data.threshold);
  if (task == Task::kAr) tc.min_conf = parse_percent(a.data.conf);
  tc.split_fraction = a.split;
  tc.seed = a.seed;
  tc.reset_bn_stats = a.reset_bn_stats;
  tc.base = build_run_config(task, a.agent, a.episodes, a.steps, a.seed,
                             a.config_path, a.preset, a.log_walltime);
  if (a.episodes == 0) tc.base.episodes = 500;  // transfer runs use 500 episodes

  const auto t0 = std::chrono::steady_clock::now();
  const TransferOutcome outcome = transfer_experiment(raw, tc);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();

  std::filesystem::create_directories(a.out);
  const auto dir = std::filesystem::path(a.out);
  {
    std::ofstream os(dir / "transfer.csv", std::ios::binary);
    write_transfer_csv(os, outcome.target, outcome.scratch);
  }
  {
    nlohmann::json j = run_config_to_json(tc.base);
    j["split_fraction"] = tc.split_fraction;
    j["reset_bn_stats"] = tc.reset_bn_stats;
    j["source_threshold"] = outcome.source_threshold;
    j["target_threshold"] = outcome.target_threshold;
    j["data"] = a.data.data;
    write_text_file((dir / "transfer_config.json").string(), j.dump(2) + "\n");
  }
  std::cout << "source items " << outcome.source_m << ", target items "
            << outcome.target_m << ", shared " << outcome.alignment.shared.size()
            << "\n";
  std::cout << "source unique " << outcome.source.patterns.size()
            << ", transferred " << outcome.target.patterns.size() << ", scratch "
            << outcome.scratch.patterns.size() << " (in " << ms << " ms)\n";
  return kExitOk;
}

struct SweepArgs {
  DataArgs data;
  std::string agent = "fusion";
  int episodes = 0;
  int steps = 0;
  std::uint64_t seed = 1;
  std::string grid_path;
  int repeats = 1;
  std::int64_t target_count = 0;
  std::string out;
  std::string config_path;
};

int cmd_sweep(const SweepArgs& a) {
  const Task task = task_from_name(a.data.task);
  const TransactionDatabase raw = load_database(a.data, task);
  const std::int64_t threshold = resolve_threshold(raw, task, a.data);
  const PrunedDatabase pruned = prune_items(raw, task, threshold);
  const MeasureConfig measure = build_measure(task, threshold, a.data);
  const RunConfig base = build_run_config(task, a.agent, a.episodes, a.steps, a.seed,
                                          a.config_path, "", false);

  const nlohmann::json grid_json = parse_json_file(a.grid_path);
  if (!grid_json.is_object())
    throw std::runtime_error("grid file must hold an object of parameter -> values");
  std::vector<std::pair<std::string, std::vector<double>>> grid;
  for (const auto& [key, values] : grid_json.items())
    grid.emplace_back(key, values.get<std::vector<double>>());

  std::optional<std::size_t> target;
  if (a.target_count > 0) target = static_cast<std::size_t>(a.target_count);
  const std::vector<SweepRun> runs =
      sweep(pruned.db, measure, base, grid, a.repeats, target, worker_count());

  std::ofstream os(a.out, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + a.out + " for writing");
  write_sweep_csv(os, runs);
  std::cout << runs.size() << " runs written to " << a.out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reinforcement-learning itemset miner"};
  app.require_subcommand(1);

  MineArgs mine_args;
  CLI::App* mine = app.add_subcommand("mine", "train an agent and extract patterns");
  add_data_options(mine, mine_args.data);
  mine->add_option("--agent", mine_args.agent, "random, state-eps, state-prob, basic or fusion")
      ->check(CLI::IsMember({"random", "state-eps", "state-prob", "basic", "fusion"}));
  mine->add_option("--episodes", mine_args.episodes, "episode count (default per task)");
  mine->add_option("--steps", mine_args.steps, "steps per episode (default 500)");
  mine->add_option("--seed", mine_args.seed, "random seed");
  mine->add_option("--out", mine_args.out, "output directory")->required();
  mine->add_option("--config", mine_args.config_path, "JSON file overlaying run settings");
  mine->add_option("--preset", mine_args.preset,
                   "named hyperparameter set; 'published' pins the per-task training settings")
      ->check(CLI::IsMember({"published"}));
  mine->add_flag("--log-walltime", mine_args.log_walltime,
                 "record per-episode wall time (breaks byte-reproducibility)");

  BaselineArgs baseline_args;
  CLI::App* baseline = app.add_subcommand("baseline", "exhaustively mine the ground truth");
  add_data_options(baseline, baseline_args.data);
  baseline->add_option("--out", baseline_args.out, "output pattern file")->required();
  baseline->add_option("--candidate-cap", baseline_args.candidate_cap,
                       "abort after this many search candidates");

  CompareArgs compare_args;
  CLI::App* compare = app.add_subcommand("compare", "coverage of a result against a baseline");
  compare->add_option("--task", compare_args.task, "hui, fi or ar")
      ->check(CLI::IsMember({"hui", "fi", "ar"}))
      ->required();
  compare->add_option("--result", compare_args.result, "pattern file to evaluate")->required();
  compare->add_option("--baseline", compare_args.baseline, "ground-truth pattern file")
      ->required();

  TransferArgs transfer_args;
  CLI::App* transfer = app.add_subcommand("transfer", "train, transfer to a partition, retrain");
  add_data_options(transfer, transfer_args.data);
  transfer->add_option("--agent", transfer_args.agent, "training agent: basic or fusion")
      ->check(CLI::IsMember({"basic", "fusion"}));
  transfer->add_option("--episodes", transfer_args.episodes, "episode count (default 500)");
  transfer->add_option("--steps", transfer_args.steps, "steps per episode (default 500)");
  transfer->add_option("--seed", transfer_args.seed, "random seed");
  transfer->add_option("--split", transfer_args.split, "source partition fraction")
      ->check(CLI::Range(0.05, 0.95));
  transfer->add_option("--out", transfer_args.out, "output directory")->required();
  transfer->add_option("--config", transfer_args.config_path, "JSON run settings overlay");
  transfer->add_option("--preset", transfer_args.preset,
                       "named hyperparameter set; 'published' pins the per-task training settings")
      ->check(CLI::IsMember({"published"}));
  transfer->add_flag("--reset-bn-stats", transfer_args.reset_bn_stats,
                     "reset batch-norm running statistics after the transfer");
  transfer->add_flag("--log-walltime", transfer_args.log_walltime,
                     "record per-episode wall time");

  SweepArgs sweep_args;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "per-axis hyperparameter sweep");
  add_data_options(sweep_cmd, sweep_args.data);
  sweep_cmd->add_option("--agent", sweep_args.agent, "agent under sweep");
  sweep_cmd->add_option("--episodes", sweep_args.episodes, "episode count");
  sweep_cmd->add_option("--steps", sweep_args.steps, "steps per episode");
  sweep_cmd->add_option("--seed", sweep_args.seed, "base seed; runs use seed, seed+1, ...");
  sweep_cmd->add_option("--grid", sweep_args.grid_path, "JSON object: parameter -> value list")
      ->required();
  sweep_cmd->add_option("--repeats", sweep_args.repeats, "runs per grid cell")
      ->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--target-count", sweep_args.target_count,
                        "pattern count that defines the step-budget metric");
  sweep_cmd->add_option("--out", sweep_args.out, "output CSV file")->required();
  sweep_cmd->add_option("--config", sweep_args.config_path, "JSON run settings overlay");

  try {
    app.parse(argc, argv);
    if (mine->parsed()) validate_data_args(mine_args.data);
    if (baseline->parsed()) validate_data_args(baseline_args.data);
    if (transfer->parsed()) validate_data_args(transfer_args.data);
    if (sweep_cmd->parsed()) validate_data_args(sweep_args.data);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitArgs;
  }

  try {
    if (mine->parsed()) return cmd_mine(mine_args);
    if (baseline->parsed()) return cmd_baseline(baseline_args);
    if (compare->parsed()) return cmd_compare(compare_args);
    if (transfer->parsed()) return cmd_transfer(transfer_args);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_args);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitRuntime;
  }
  return kExitArgs;
}
