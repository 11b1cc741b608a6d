#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rlminer/qnetwork.hpp"

namespace rlminer {

struct RAdamConfig {
  double alpha = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double grad_clip_norm = 0.0;  // global L2 clip; 0 disables
};

// Rectified Adam. Early steps, where the variance estimate is unreliable
// (rho_t <= 4), fall back to the unadapted momentum update; later steps
// apply the variance-rectified adaptive step.
class RAdam {
 public:
  RAdam() = default;

  RAdam(const std::vector<Tensor*>& params, RAdamConfig cfg = {}) : cfg_(cfg) {
    for (const Tensor* t : params) {
      m_.emplace_back(t->size(), 0.0);
      v_.emplace_back(t->size(), 0.0);
    }
  }

  const RAdamConfig& config() const { return cfg_; }
  std::int64_t step_count() const { return t_; }

  void step(const std::vector<Tensor*>& params) {
    if (params.size() != m_.size())
      throw std::runtime_error("optimizer/parameter shape mismatch");
    if (cfg_.grad_clip_norm > 0.0) clip_gradients(params);
    ++t_;
    const double b1t = std::pow(cfg_.beta1, static_cast<double>(t_));
    const double b2t = std::pow(cfg_.beta2, static_cast<double>(t_));
    const double rho_inf = 2.0 / (1.0 - cfg_.beta2) - 1.0;
    const double rho_t = rho_inf - 2.0 * static_cast<double>(t_) * b2t / (1.0 - b2t);
    const bool rectified = rho_t > 4.0;
    double r = 1.0;
    if (rectified) {
      r = std::sqrt((rho_t - 4.0) * (rho_t - 2.0) * rho_inf /
                    ((rho_inf - 4.0) * (rho_inf - 2.0) * rho_t));
    }
    for (std::size_t p = 0; p < params.size(); ++p) {
      Tensor& t = *params[p];
      if (t.size() != m_[p].size())
        throw std::runtime_error("optimizer/parameter shape mismatch");
      for (std::size_t i = 0; i < t.size(); ++i) {
        const double g = t.g[i];
        m_[p][i] = cfg_.beta1 * m_[p][i] + (1.0 - cfg_.beta1) * g;
        v_[p][i] = cfg_.beta2 * v_[p][i] + (1.0 - cfg_.beta2) * g * g;
        const double mhat = m_[p][i] / (1.0 - b1t);
        if (rectified) {
          const double vhat = std::sqrt(v_[p][i] / (1.0 - b2t));
          t.v[i] -= cfg_.alpha * r * mhat / (vhat + cfg_.eps);
        } else {
          t.v[i] -= cfg_.alpha * mhat;
        }
      }
    }
  }

  // Moment access for checkpoints.
  std::vector<std::vector<double>>& first_moments() { return m_; }
  std::vector<std::vector<double>>& second_moments() { return v_; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }
  void set_step_count(std::int64_t t) { t_ = t; }

 private:
  void clip_gradients(const std::vector<Tensor*>& params) const {
    double sq = 0.0;
    for (const Tensor* t : params)
      for (double g : t->g) sq += g * g;
    const double norm = std::sqrt(sq);
    if (norm <= cfg_.grad_clip_norm) return;
    const double scale = cfg_.grad_clip_norm / norm;
    for (Tensor* t : params)
      for (double& g : t->g) g *= scale;
  }

  RAdamConfig cfg_;
  std::int64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace rlminer
