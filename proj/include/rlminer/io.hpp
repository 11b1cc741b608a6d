#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "rlminer/core.hpp"
#include "rlminer/dataset.hpp"
#include "rlminer/trainer.hpp"

namespace rlminer {

// --- itemset / rule files ----------------------------------------------------
//
// One pattern per line, external item ids, space-separated:
//   frequent itemsets:    `1 3 9 #SUP: 5`
//   high-utility itemsets:`1 3 9 #UTIL: 120`
//   rules:                `1 3 ==> 9 #SUP: 5 #CONF: 0.833333`
// Lines are sorted by (items, consequent) so equal result sets produce
// byte-identical files.

inline ScoredPattern pattern_to_external(const TransactionDatabase& db,
                                         const ScoredPattern& p) {
  ScoredPattern out = p;
  for (Item& i : out.pattern.items) i = static_cast<Item>(db.external_id(i));
  std::sort(out.pattern.items.begin(), out.pattern.items.end());
  if (p.pattern.is_rule())
    out.pattern.consequent = static_cast<Item>(db.external_id(p.pattern.consequent));
  return out;
}

inline std::string format_pattern_line(const ScoredPattern& p, Task task) {
  std::string line;
  for (std::size_t i = 0; i < p.pattern.items.size(); ++i) {
    if (i) line += ' ';
    line += std::to_string(p.pattern.items[i]);
  }
  switch (task) {
    case Task::kFi:
      line += " #SUP: " + std::to_string(p.measure);
      break;
    case Task::kHui:
      line += " #UTIL: " + std::to_string(p.measure);
      break;
    case Task::kAr: {
      line += " ==> " + std::to_string(p.pattern.consequent);
      line += " #SUP: " + std::to_string(p.measure);
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6f", p.confidence());
      line += " #CONF: ";
      line += buf;
      break;
    }
  }
  return line;
}

inline void write_pattern_file(std::ostream& os, const TransactionDatabase& db,
                               const std::vector<ScoredPattern>& patterns,
                               Task task) {
  std::vector<ScoredPattern> ext;
  ext.reserve(patterns.size());
  for (const auto& p : patterns) ext.push_back(pattern_to_external(db, p));
  std::sort(ext.begin(), ext.end(), [](const auto& a, const auto& b) {
    return a.pattern < b.pattern;
  });
  for (const auto& p : ext) os << format_pattern_line(p, task) << '\n';
}

// Reads a pattern file back; items stay external ids. Rule lines do not carry
// the antecedent support, so `antecedent_support` is 0 and the confidence
// column is only validated for shape.
inline std::vector<ScoredPattern> read_pattern_file(std::istream& is, Task task) {
  std::vector<ScoredPattern> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    ScoredPattern p;
    std::string tok;
    bool in_consequent = false;
    try {
      while (ss >> tok) {
        if (tok == "==>") {
          if (task != Task::kAr) throw std::runtime_error("unexpected rule arrow");
          in_consequent = true;
        } else if (tok == "#SUP:" || tok == "#UTIL:") {
          if ((tok == "#UTIL:") != (task == Task::kHui))
            throw std::runtime_error("annotation does not match the task");
          if (!(ss >> p.measure)) throw std::runtime_error("missing measure value");
        } else if (tok == "#CONF:") {
          double conf;
          if (!(ss >> conf)) throw std::runtime_error("missing confidence value");
        } else {
          const Item id = static_cast<Item>(std::stol(tok));
          if (in_consequent) {
            if (p.pattern.consequent != Pattern::kNoConsequent)
              throw std::runtime_error("multi-item consequent");
            p.pattern.consequent = id;
          } else {
            p.pattern.items.push_back(id);
          }
        }
      }
    } catch (const std::exception& ex) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": " + ex.what());
    }
    if (p.pattern.items.empty())
      throw std::runtime_error("line " + std::to_string(lineno) + ": empty itemset");
    if ((task == Task::kAr) != p.pattern.is_rule())
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": pattern shape does not match the task");
    std::sort(p.pattern.items.begin(), p.pattern.items.end());
    out.push_back(std::move(p));
  }
  return out;
}

// --- CSV reports ---------------------------------------------------------

inline std::string format_fixed6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline void write_episode_csv(std::ostream& os, const std::vector<EpisodeLog>& logs) {
  os << "episode,extracted_this_episode,cumulative_unique,mean_reward,loss_mean,wall_ms\n";
  for (const auto& l : logs) {
    os << l.episode << ',' << l.extracted_this_episode << ',' << l.cumulative_unique
       << ',' << format_fixed6(l.mean_reward) << ',' << format_fixed6(l.loss_mean)
       << ',' << l.wall_ms << '\n';
  }
}

inline void write_transfer_csv(std::ostream& os, const MiningResult& tgt,
                               const MiningResult& scratch) {
  if (tgt.logs.size() != scratch.logs.size())
    throw std::logic_error("paired transfer runs have different episode counts");
  os << "episode,tgt_cumulative,scratch_cumulative\n";
  for (std::size_t e = 0; e < tgt.logs.size(); ++e) {
    os << tgt.logs[e].episode << ',' << tgt.logs[e].cumulative_unique << ','
       << scratch.logs[e].cumulative_unique << '\n';
  }
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRun>& runs) {
  os << "param,value,repeat,seed,unique_count,total_steps\n";
  for (const auto& r : runs) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.10g", r.value);
    os << r.param << ',' << buf << ',' << r.repeat << ',' << r.seed << ','
       << r.unique_count << ',';
    if (r.total_steps) os << *r.total_steps;
    os << '\n';
  }
}

// --- JSON: run config and agent checkpoints -----------------------------------

namespace detail {

inline double checked_real(double v, const char* what) {
  if (!std::isfinite(v))
    throw std::runtime_error(std::string("non-finite value in ") + what);
  return v;
}

inline nlohmann::json tensor_to_json(const Tensor& t, const char* what) {
  nlohmann::json a = nlohmann::json::array();
  for (double v : t.v) a.push_back(checked_real(v, what));
  return a;
}

inline Tensor tensor_from_json(const nlohmann::json& j) {
  Tensor t(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) t.v[i] = j[i].get<double>();
  return t;
}

inline nlohmann::json reals_to_json(const std::vector<double>& v, const char* what) {
  nlohmann::json a = nlohmann::json::array();
  for (double x : v) a.push_back(checked_real(x, what));
  return a;
}

inline nlohmann::json bn_to_json(const nn::BatchNorm& bn) {
  return {{"gamma", tensor_to_json(bn.gamma, "batch norm scale")},
          {"beta", tensor_to_json(bn.beta, "batch norm shift")},
          {"run_mean", reals_to_json(bn.run_mean, "batch norm running mean")},
          {"run_var", reals_to_json(bn.run_var, "batch norm running variance")}};
}

inline void bn_from_json(const nlohmann::json& j, nn::BatchNorm& bn) {
  bn.gamma = tensor_from_json(j.at("gamma"));
  bn.beta = tensor_from_json(j.at("beta"));
  bn.run_mean = j.at("run_mean").get<std::vector<double>>();
  bn.run_var = j.at("run_var").get<std::vector<double>>();
}

}  // namespace detail

inline nlohmann::json network_spec_to_json(const NetworkSpec& s) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : s.blocks)
    blocks.push_back({{"width", b.width},
                      {"batch_norm", b.batch_norm},
                      {"leaky_slope", b.leaky_slope}});
  return {{"input_dim", s.input_dim},
          {"blocks", blocks},
          {"output_dim", s.output_dim},
          {"input_batch_norm", s.input_batch_norm},
          {"bn_momentum", s.bn_momentum},
          {"bn_eps", s.bn_eps}};
}

inline NetworkSpec network_spec_from_json(const nlohmann::json& j) {
  NetworkSpec s;
  s.input_dim = j.at("input_dim").get<int>();
  for (const auto& b : j.at("blocks"))
    s.blocks.push_back({b.at("width").get<int>(), b.at("batch_norm").get<bool>(),
                        b.at("leaky_slope").get<double>()});
  s.output_dim = j.at("output_dim").get<int>();
  s.input_batch_norm = j.at("input_batch_norm").get<bool>();
  s.bn_momentum = j.at("bn_momentum").get<double>();
  s.bn_eps = j.at("bn_eps").get<double>();
  return s;
}

inline nlohmann::json network_to_json(const QNetwork& net) {
  nlohmann::json j;
  j["spec"] = network_spec_to_json(net.spec());
  if (net.input_bn()) j["input_bn"] = detail::bn_to_json(*net.input_bn());
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& blk : net.hidden_blocks()) {
    nlohmann::json b;
    b["w"] = detail::tensor_to_json(blk.fc.w, "layer weights");
    b["b"] = detail::tensor_to_json(blk.fc.b, "layer biases");
    if (blk.bn) b["bn"] = detail::bn_to_json(*blk.bn);
    blocks.push_back(std::move(b));
  }
  j["blocks"] = std::move(blocks);
  j["output"] = {{"w", detail::tensor_to_json(net.output_layer().w, "output weights")},
                 {"b", detail::tensor_to_json(net.output_layer().b, "output biases")}};
  return j;
}

inline QNetwork network_from_json(const nlohmann::json& j) {
  const NetworkSpec spec = network_spec_from_json(j.at("spec"));
  Rng scratch_rng(0);  // shapes only; every value is overwritten below
  QNetwork net(spec, scratch_rng);
  if (net.input_bn()) {
    if (!j.contains("input_bn")) throw std::runtime_error("checkpoint misses input_bn");
    detail::bn_from_json(j.at("input_bn"), *net.input_bn());
  }
  const auto& blocks = j.at("blocks");
  if (blocks.size() != net.hidden_blocks().size())
    throw std::runtime_error("checkpoint block count mismatch");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    auto& blk = net.hidden_blocks()[i];
    Tensor w = detail::tensor_from_json(blocks[i].at("w"));
    Tensor b = detail::tensor_from_json(blocks[i].at("b"));
    if (w.size() != blk.fc.w.size() || b.size() != blk.fc.b.size())
      throw std::runtime_error("checkpoint layer shape mismatch");
    blk.fc.w = std::move(w);
    blk.fc.b = std::move(b);
    if (blk.bn) detail::bn_from_json(blocks[i].at("bn"), *blk.bn);
  }
  Tensor ow = detail::tensor_from_json(j.at("output").at("w"));
  Tensor ob = detail::tensor_from_json(j.at("output").at("b"));
  if (ow.size() != net.output_layer().w.size() ||
      ob.size() != net.output_layer().b.size())
    throw std::runtime_error("checkpoint output shape mismatch");
  net.output_layer().w = std::move(ow);
  net.output_layer().b = std::move(ob);
  return net;
}

inline nlohmann::json decay_to_json(const DecaySchedule& d) {
  return {{"start", d.start}, {"end", d.end}, {"delta", d.delta}};
}

inline DecaySchedule decay_from_json(const nlohmann::json& j, DecaySchedule base) {
  base.start = j.value("start", base.start);
  base.end = j.value("end", base.end);
  base.delta = j.value("delta", base.delta);
  return base;
}

inline nlohmann::json run_config_to_json(const RunConfig& c) {
  return {{"task", task_name(c.task)},
          {"agent", agent_name(c.agent)},
          {"seed", c.seed},
          {"episodes", c.episodes},
          {"steps_per_episode", c.steps_per_episode},
          {"replay_capacity", c.replay_capacity},
          {"batch_size", c.batch_size},
          {"gamma", c.gamma},
          {"target_sync_period", c.target_sync_period},
          {"learning_rate", c.learning_rate},
          {"grad_clip_norm", c.grad_clip_norm},
          {"eps_schedule", decay_to_json(c.eps_schedule)},
          {"lambda_schedule", decay_to_json(c.lambda_schedule)},
          {"heuristic_eps", c.heuristic_eps},
          {"hidden_widths", c.hidden_widths},
          {"block_batch_norm", c.block_batch_norm},
          {"input_batch_norm", c.input_batch_norm},
          {"leaky_slope", c.leaky_slope},
          {"bn_momentum", c.bn_momentum},
          {"bn_eps", c.bn_eps},
          {"log_walltime", c.log_walltime}};
}

// Overlays the keys present in `j` onto `base`; absent keys keep base values,
// so partial config files compose with task defaults.
inline RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {}) {
  if (j.contains("task")) base.task = task_from_name(j.at("task").get<std::string>());
  if (j.contains("agent")) base.agent = agent_from_name(j.at("agent").get<std::string>());
  base.seed = j.value("seed", base.seed);
  base.episodes = j.value("episodes", base.episodes);
  base.steps_per_episode = j.value("steps_per_episode", base.steps_per_episode);
  base.replay_capacity = j.value("replay_capacity", base.replay_capacity);
  base.batch_size = j.value("batch_size", base.batch_size);
  base.gamma = j.value("gamma", base.gamma);
  base.target_sync_period = j.value("target_sync_period", base.target_sync_period);
  base.learning_rate = j.value("learning_rate", base.learning_rate);
  base.grad_clip_norm = j.value("grad_clip_norm", base.grad_clip_norm);
  if (j.contains("eps_schedule"))
    base.eps_schedule = decay_from_json(j.at("eps_schedule"), base.eps_schedule);
  if (j.contains("lambda_schedule"))
    base.lambda_schedule = decay_from_json(j.at("lambda_schedule"), base.lambda_schedule);
  base.heuristic_eps = j.value("heuristic_eps", base.heuristic_eps);
  if (j.contains("hidden_widths"))
    base.hidden_widths = j.at("hidden_widths").get<std::vector<int>>();
  base.block_batch_norm = j.value("block_batch_norm", base.block_batch_norm);
  base.input_batch_norm = j.value("input_batch_norm", base.input_batch_norm);
  base.leaky_slope = j.value("leaky_slope", base.leaky_slope);
  base.bn_momentum = j.value("bn_momentum", base.bn_momentum);
  base.bn_eps = j.value("bn_eps", base.bn_eps);
  base.log_walltime = j.value("log_walltime", base.log_walltime);
  return base;
}

inline nlohmann::json agent_snapshot_to_json(const AgentSnapshot& s) {
  nlohmann::json opt;
  opt["t"] = s.optimizer.step_count();
  opt["config"] = {{"alpha", s.optimizer.config().alpha},
                   {"beta1", s.optimizer.config().beta1},
                   {"beta2", s.optimizer.config().beta2},
                   {"eps", s.optimizer.config().eps},
                   {"grad_clip_norm", s.optimizer.config().grad_clip_norm}};
  nlohmann::json m = nlohmann::json::array(), v = nlohmann::json::array();
  for (const auto& p : s.optimizer.first_moments())
    m.push_back(detail::reals_to_json(p, "optimizer first moments"));
  for (const auto& p : s.optimizer.second_moments())
    v.push_back(detail::reals_to_json(p, "optimizer second moments"));
  opt["m"] = std::move(m);
  opt["v"] = std::move(v);
  return {{"format", "rlminer-agent-v1"},
          {"network", network_to_json(s.network)},
          {"target", network_to_json(s.target)},
          {"optimizer", std::move(opt)},
          {"k_total", s.k_total},
          {"rng", s.rng_state}};
}

inline AgentSnapshot agent_snapshot_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != std::string("rlminer-agent-v1"))
    throw std::runtime_error("unsupported agent checkpoint format");
  AgentSnapshot s{QNetwork(), QNetwork(), RAdam(), 0, ""};
  s.network = network_from_json(j.at("network"));
  s.target = network_from_json(j.at("target"));
  const auto& opt = j.at("optimizer");
  RAdamConfig cfg;
  cfg.alpha = opt.at("config").at("alpha").get<double>();
  cfg.beta1 = opt.at("config").at("beta1").get<double>();
  cfg.beta2 = opt.at("config").at("beta2").get<double>();
  cfg.eps = opt.at("config").at("eps").get<double>();
  cfg.grad_clip_norm = opt.at("config").value("grad_clip_norm", 0.0);
  s.optimizer = RAdam(s.network.parameters(), cfg);
  s.optimizer.set_step_count(opt.at("t").get<std::int64_t>());
  auto& m = s.optimizer.first_moments();
  auto& v = s.optimizer.second_moments();
  const auto& jm = opt.at("m");
  const auto& jv = opt.at("v");
  if (jm.size() != m.size() || jv.size() != v.size())
    throw std::runtime_error("checkpoint optimizer shape mismatch");
  for (std::size_t i = 0; i < m.size(); ++i) {
    auto mi = jm[i].get<std::vector<double>>();
    auto vi = jv[i].get<std::vector<double>>();
    if (mi.size() != m[i].size() || vi.size() != v[i].size())
      throw std::runtime_error("checkpoint optimizer shape mismatch");
    m[i] = std::move(mi);
    v[i] = std::move(vi);
  }
  s.k_total = j.at("k_total").get<std::int64_t>();
  s.rng_state = j.at("rng").get<std::string>();
  return s;
}

// --- small file helpers --------------------------------------------------

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << content;
  if (!os) throw std::runtime_error("failed writing " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace rlminer
