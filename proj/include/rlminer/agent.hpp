#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlminer/core.hpp"
#include "rlminer/optimizer.hpp"
#include "rlminer/qnetwork.hpp"
#include "rlminer/rng.hpp"

namespace rlminer {

// Action selection policies. Random, state-eps and state-prob are
// training-free heuristics working directly off the state vector; basic is a
// plain DQN policy; fusion mixes the state vector into the Q-values with a
// decaying weight.
enum class AgentKind { kRandom, kStateEps, kStateProb, kBasic, kFusion };

inline const char* agent_name(AgentKind k) {
  switch (k) {
    case AgentKind::kRandom: return "random";
    case AgentKind::kStateEps: return "state-eps";
    case AgentKind::kStateProb: return "state-prob";
    case AgentKind::kBasic: return "basic";
    case AgentKind::kFusion: return "fusion";
  }
  throw std::logic_error("unknown agent kind");
}

inline AgentKind agent_from_name(const std::string& s) {
  if (s == "random") return AgentKind::kRandom;
  if (s == "state-eps") return AgentKind::kStateEps;
  if (s == "state-prob") return AgentKind::kStateProb;
  if (s == "basic") return AgentKind::kBasic;
  if (s == "fusion") return AgentKind::kFusion;
  throw std::runtime_error("unknown agent: " + s);
}

inline bool agent_uses_network(AgentKind k) {
  return k == AgentKind::kBasic || k == AgentKind::kFusion;
}

// value_at(k) = end + (start - end) * exp(-k / delta), evaluated at the
// global step count k. Covers both the exploration rate and the fusion
// weight.
struct DecaySchedule {
  double start = 0.9;
  double end = 0.05;
  double delta = 200.0;

  double value_at(std::int64_t k) const {
    return end + (start - end) * std::exp(-static_cast<double>(k) / delta);
  }

  static DecaySchedule constant(double v) { return {v, v, 1.0}; }

  friend bool operator==(const DecaySchedule&, const DecaySchedule&) = default;
};

struct Experience {
  std::vector<double> state;
  int action = 0;
  int reward = 0;
  std::vector<double> next_state;
};

// Fixed-capacity FIFO: once full, each push evicts the oldest entry.
// Sampling is uniform with replacement.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity) : cap_(capacity) {
    if (capacity == 0) throw std::runtime_error("replay capacity must be positive");
  }

  std::size_t capacity() const { return cap_; }
  std::size_t size() const { return buf_.size(); }

  void push(Experience e) {
    if (buf_.size() < cap_) {
      buf_.push_back(std::move(e));
    } else {
      buf_[head_] = std::move(e);
      head_ = (head_ + 1) % cap_;
    }
  }

  // i = 0 is the oldest entry still stored.
  const Experience& at(std::size_t i) const {
    return buf_[(head_ + i) % buf_.size()];
  }

  std::vector<std::size_t> sample(std::size_t batch, Rng& rng) const {
    std::vector<std::size_t> idx(batch);
    for (auto& i : idx) i = rng.index(buf_.size());
    return idx;
  }

 private:
  std::size_t cap_;
  std::size_t head_ = 0;
  std::vector<Experience> buf_;
};

// Ties resolve to the lowest index so runs are reproducible.
inline int argmax_lowest(std::span<const double> v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

// Uniform over the m flip actions; never reinitializes.
inline int select_action_random(Item m, Rng& rng) {
  return static_cast<int>(rng.index(static_cast<std::size_t>(m)));
}

// Greedy on the state vector with eps exploration. State dimensions index
// items modulo m, which folds the two halves of a rule-mining state onto the
// same flip actions.
inline int select_action_state_eps(std::span<const double> state, Item m,
                                   double eps, Rng& rng) {
  if (rng.bernoulli(eps)) return select_action_random(m, rng);
  return argmax_lowest(state) % m;
}

// Samples a dimension with probability proportional to its state value
// (state values are nonnegative by construction). An all-zero state falls
// back to uniform.
inline int select_action_state_prob(std::span<const double> state, Item m,
                                    Rng& rng) {
  double sum = 0.0;
  for (double v : state) sum += v;
  if (!(sum > 0.0)) return select_action_random(m, rng);
  const double r = rng.real01() * sum;
  double acc = 0.0;
  for (int i = 0; i < static_cast<int>(state.size()); ++i) {
    acc += state[i];
    if (r < acc) return i % m;
  }
  return static_cast<int>(state.size() - 1) % m;
}

// eps-greedy over the m+1 Q-values; the exploration branch flips only.
inline int select_action_basic(std::span<const double> q, Item m, double eps,
                               Rng& rng) {
  if (rng.bernoulli(eps)) return select_action_random(m, rng);
  return argmax_lowest(q);
}

// eps-greedy over lambda * s' + (1 - lambda) * q, where s' is the state
// vector extended to action space size. With lambda identically 0 this is
// exactly the basic policy, including its random number consumption.
inline int select_action_fusion(std::span<const double> q,
                                std::span<const double> extended_state,
                                double lambda, Item m, double eps, Rng& rng) {
  if (rng.bernoulli(eps)) return select_action_random(m, rng);
  if (q.size() != extended_state.size())
    throw std::logic_error("fusion value size mismatch");
  std::vector<double> fused(q.size());
  for (std::size_t i = 0; i < q.size(); ++i)
    fused[i] = lambda * extended_state[i] + (1.0 - lambda) * q[i];
  return argmax_lowest(fused);
}

// One Q-learning update: sample a minibatch, bootstrap targets from the
// target network in eval mode, descend the masked squared error. No-op until
// the memory can fill a batch.
inline std::optional<double> train_step(QNetwork& net, const QNetwork& target_net,
                                        const ReplayMemory& memory, RAdam& opt,
                                        double gamma, int batch_size, Rng& rng) {
  if (memory.size() < static_cast<std::size_t>(batch_size)) return std::nullopt;
  const std::vector<std::size_t> idx =
      memory.sample(static_cast<std::size_t>(batch_size), rng);
  const int in_dim = net.spec().input_dim;
  Matrix states(batch_size, in_dim), next_states(batch_size, in_dim);
  std::vector<int> actions(static_cast<std::size_t>(batch_size));
  std::vector<double> rewards(static_cast<std::size_t>(batch_size));
  for (int r = 0; r < batch_size; ++r) {
    const Experience& e = memory.at(idx[static_cast<std::size_t>(r)]);
    for (int c = 0; c < in_dim; ++c) {
      states.at(r, c) = e.state[static_cast<std::size_t>(c)];
      next_states.at(r, c) = e.next_state[static_cast<std::size_t>(c)];
    }
    actions[static_cast<std::size_t>(r)] = e.action;
    rewards[static_cast<std::size_t>(r)] = e.reward;
  }
  const Matrix next_q = target_net.forward_eval(next_states);
  std::vector<double> targets(static_cast<std::size_t>(batch_size));
  for (int r = 0; r < batch_size; ++r) {
    double best = next_q.at(r, 0);
    for (int j = 1; j < next_q.cols; ++j) best = std::max(best, next_q.at(r, j));
    targets[static_cast<std::size_t>(r)] = rewards[static_cast<std::size_t>(r)] + gamma * best;
  }
  QNetwork::ForwardCache cache;
  const Matrix q = net.forward_train(states, cache);
  Matrix d_out;
  const double loss = masked_squared_loss(q, actions, targets, d_out);
  net.zero_grad();
  net.backward(cache, d_out);
  opt.step(net.parameters());
  return loss;
}

}  // namespace rlminer
