#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlminer/core.hpp"
#include "rlminer/rng.hpp"

namespace rlminer {

struct Matrix {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
};

// Parameter tensor with its gradient accumulator.
struct Tensor {
  std::vector<double> v;
  std::vector<double> g;

  Tensor() = default;
  explicit Tensor(std::size_t n, double fill = 0.0) : v(n, fill), g(n, 0.0) {}
  std::size_t size() const { return v.size(); }
};

struct BlockSpec {
  int width = 0;
  bool batch_norm = true;
  double leaky_slope = 0.01;
};

struct NetworkSpec {
  int input_dim = 0;
  std::vector<BlockSpec> blocks;
  int output_dim = 0;
  bool input_batch_norm = false;
  double bn_momentum = 0.1;
  double bn_eps = 1e-5;

  // Default architectures: three 512-wide blocks for HUI/AR, one wide block
  // for FI, batch-normalized input for AR (whose state is 2M-dimensional).
  static NetworkSpec for_task(Task task, Item m, std::vector<int> widths = {},
                              double leaky_slope = 0.01, bool block_bn = true) {
    NetworkSpec s;
    s.input_dim = task == Task::kAr ? 2 * m : m;
    s.output_dim = m + 1;
    s.input_batch_norm = task == Task::kAr;
    if (widths.empty())
      widths = task == Task::kFi ? std::vector<int>{4096}
                                 : std::vector<int>{512, 512, 512};
    for (int w : widths) s.blocks.push_back({w, block_bn, leaky_slope});
    return s;
  }

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

inline bool operator==(const BlockSpec& a, const BlockSpec& b) {
  return a.width == b.width && a.batch_norm == b.batch_norm &&
         a.leaky_slope == b.leaky_slope;
}

namespace nn {

struct Linear {
  Tensor w;  // out x in, row-major
  Tensor b;  // out
  int in = 0, out = 0;

  void init(int in_dim, int out_dim, double leaky_slope, Rng& rng) {
    if (in_dim <= 0 || out_dim <= 0) throw std::runtime_error("zero-width layer");
    in = in_dim;
    out = out_dim;
    w = Tensor(static_cast<std::size_t>(in) * out);
    b = Tensor(static_cast<std::size_t>(out));
    // He initialization with the leaky-ReLU gain; the output layer passes
    // slope 0 and gets plain sqrt(2/fan_in).
    const double stddev = std::sqrt(2.0 / ((1.0 + leaky_slope * leaky_slope) * in));
    for (double& x : w.v) x = stddev * rng.normal();
  }

  Matrix forward(const Matrix& x) const {
    Matrix y(x.rows, out);
    for (int r = 0; r < x.rows; ++r) {
      const double* xr = &x.a[static_cast<std::size_t>(r) * in];
      for (int j = 0; j < out; ++j) {
        const double* wj = &w.v[static_cast<std::size_t>(j) * in];
        double acc = b.v[j];
        for (int k = 0; k < in; ++k) acc += xr[k] * wj[k];
        y.at(r, j) = acc;
      }
    }
    return y;
  }

  // Accumulates dW/db, returns dX.
  Matrix backward(const Matrix& x, const Matrix& dy) {
    Matrix dx(x.rows, in);
    for (int r = 0; r < x.rows; ++r) {
      const double* xr = &x.a[static_cast<std::size_t>(r) * in];
      const double* dyr = &dy.a[static_cast<std::size_t>(r) * out];
      double* dxr = &dx.a[static_cast<std::size_t>(r) * in];
      for (int j = 0; j < out; ++j) {
        const double d = dyr[j];
        if (d == 0.0) continue;
        double* gw = &w.g[static_cast<std::size_t>(j) * in];
        const double* wj = &w.v[static_cast<std::size_t>(j) * in];
        for (int k = 0; k < in; ++k) {
          gw[k] += d * xr[k];
          dxr[k] += d * wj[k];
        }
        b.g[j] += d;
      }
    }
    return dx;
  }
};

struct BatchNorm {
  Tensor gamma, beta;
  std::vector<double> run_mean, run_var;
  int dim = 0;
  double momentum = 0.1, eps = 1e-5;

  void init(int d, double mom, double e) {
    dim = d;
    momentum = mom;
    eps = e;
    gamma = Tensor(static_cast<std::size_t>(d), 1.0);
    beta = Tensor(static_cast<std::size_t>(d), 0.0);
    run_mean.assign(d, 0.0);
    run_var.assign(d, 1.0);
  }

  struct Cache {
    std::vector<double> invstd;
    Matrix xhat;
  };

  // Normalizes with batch statistics and folds them into the running
  // estimates (unbiased variance for the running update).
  Matrix forward_train(const Matrix& x, Cache& cache) {
    const int n = x.rows;
    if (n < 2) throw std::runtime_error("batch normalization needs batch size >= 2");
    Matrix y(n, dim);
    cache.invstd.assign(dim, 0.0);
    cache.xhat = Matrix(n, dim);
    for (int j = 0; j < dim; ++j) {
      double mean = 0.0;
      for (int r = 0; r < n; ++r) mean += x.at(r, j);
      mean /= n;
      double var = 0.0;
      for (int r = 0; r < n; ++r) {
        const double d = x.at(r, j) - mean;
        var += d * d;
      }
      var /= n;
      const double invstd = 1.0 / std::sqrt(var + eps);
      cache.invstd[j] = invstd;
      for (int r = 0; r < n; ++r) {
        const double xh = (x.at(r, j) - mean) * invstd;
        cache.xhat.at(r, j) = xh;
        y.at(r, j) = gamma.v[j] * xh + beta.v[j];
      }
      run_mean[j] = (1.0 - momentum) * run_mean[j] + momentum * mean;
      run_var[j] = (1.0 - momentum) * run_var[j] +
                   momentum * var * static_cast<double>(n) / (n - 1);
    }
    return y;
  }

  Matrix forward_eval(const Matrix& x) const {
    Matrix y(x.rows, dim);
    for (int j = 0; j < dim; ++j) {
      const double invstd = 1.0 / std::sqrt(run_var[j] + eps);
      const double scale = gamma.v[j] * invstd;
      const double shift = beta.v[j] - scale * run_mean[j];
      for (int r = 0; r < x.rows; ++r) y.at(r, j) = scale * x.at(r, j) + shift;
    }
    return y;
  }

  Matrix backward(const Cache& cache, const Matrix& dy) {
    const int n = dy.rows;
    Matrix dx(n, dim);
    for (int j = 0; j < dim; ++j) {
      double sum_dy = 0.0, sum_dy_xhat = 0.0;
      for (int r = 0; r < n; ++r) {
        sum_dy += dy.at(r, j);
        sum_dy_xhat += dy.at(r, j) * cache.xhat.at(r, j);
      }
      gamma.g[j] += sum_dy_xhat;
      beta.g[j] += sum_dy;
      const double k = gamma.v[j] * cache.invstd[j] / n;
      for (int r = 0; r < n; ++r) {
        dx.at(r, j) = k * (n * dy.at(r, j) - sum_dy -
                           cache.xhat.at(r, j) * sum_dy_xhat);
      }
    }
    return dx;
  }
};

inline Matrix leaky_relu_forward(const Matrix& x, double slope) {
  Matrix y = x;
  for (double& v : y.a) v = v > 0.0 ? v : slope * v;
  return y;
}

inline Matrix leaky_relu_backward(const Matrix& x, const Matrix& dy, double slope) {
  Matrix dx = dy;
  for (std::size_t i = 0; i < dx.a.size(); ++i)
    if (x.a[i] <= 0.0) dx.a[i] *= slope;
  return dx;
}

}  // namespace nn

// MLP flavor used by the agent: optional input batch norm, hidden blocks of
// FC + optional batch norm + leaky ReLU, affine output row per action.
class QNetwork {
 public:
  struct Block {
    nn::Linear fc;
    std::optional<nn::BatchNorm> bn;
    double slope = 0.01;
  };

  struct ForwardCache {
    Matrix input;
    nn::BatchNorm::Cache input_bn;
    std::vector<Matrix> fc_in;
    std::vector<nn::BatchNorm::Cache> bn;
    std::vector<Matrix> act_in;
    Matrix out_in;
  };

  QNetwork() = default;

  QNetwork(const NetworkSpec& spec, Rng& rng) : spec_(spec) {
    if (spec.input_dim <= 0 || spec.output_dim <= 0)
      throw std::runtime_error("zero-width layer");
    if (spec.input_batch_norm)
      input_bn_.emplace(), input_bn_->init(spec.input_dim, spec.bn_momentum, spec.bn_eps);
    int cur = spec.input_dim;
    for (const auto& bs : spec.blocks) {
      Block blk;
      blk.slope = bs.leaky_slope;
      blk.fc.init(cur, bs.width, bs.leaky_slope, rng);
      if (bs.batch_norm) {
        blk.bn.emplace();
        blk.bn->init(bs.width, spec.bn_momentum, spec.bn_eps);
      }
      blocks_.push_back(std::move(blk));
      cur = bs.width;
    }
    output_.init(cur, spec.output_dim, 0.0, rng);
  }

  const NetworkSpec& spec() const { return spec_; }

  Matrix forward_eval(const Matrix& x) const {
    check_input(x);
    Matrix cur = input_bn_ ? input_bn_->forward_eval(x) : x;
    for (const auto& blk : blocks_) {
      cur = blk.fc.forward(cur);
      if (blk.bn) cur = blk.bn->forward_eval(cur);
      cur = nn::leaky_relu_forward(cur, blk.slope);
    }
    return output_.forward(cur);
  }

  std::vector<double> forward_eval_single(std::span<const double> state) const {
    Matrix x(1, spec_.input_dim);
    if (static_cast<int>(state.size()) != spec_.input_dim)
      throw std::runtime_error("state dimension mismatch");
    for (int i = 0; i < spec_.input_dim; ++i) x.at(0, i) = state[i];
    const Matrix y = forward_eval(x);
    return y.a;
  }

  Matrix forward_train(const Matrix& x, ForwardCache& cache) {
    check_input(x);
    if (x.rows < 2)
      throw std::runtime_error("train-mode forward needs batch size >= 2");
    cache.input = x;
    cache.fc_in.clear();
    cache.bn.clear();
    cache.act_in.clear();
    Matrix cur = input_bn_ ? input_bn_->forward_train(x, cache.input_bn) : x;
    for (auto& blk : blocks_) {
      cache.fc_in.push_back(cur);
      cur = blk.fc.forward(cur);
      if (blk.bn) {
        nn::BatchNorm::Cache c;
        cur = blk.bn->forward_train(cur, c);
        cache.bn.push_back(std::move(c));
      } else {
        cache.bn.emplace_back();
      }
      cache.act_in.push_back(cur);
      cur = nn::leaky_relu_forward(cur, blk.slope);
    }
    cache.out_in = cur;
    return output_.forward(cur);
  }

  void backward(const ForwardCache& cache, const Matrix& d_out) {
    Matrix d = output_.backward(cache.out_in, d_out);
    for (int i = static_cast<int>(blocks_.size()) - 1; i >= 0; --i) {
      auto& blk = blocks_[static_cast<std::size_t>(i)];
      d = nn::leaky_relu_backward(cache.act_in[static_cast<std::size_t>(i)], d, blk.slope);
      if (blk.bn) d = blk.bn->backward(cache.bn[static_cast<std::size_t>(i)], d);
      d = blk.fc.backward(cache.fc_in[static_cast<std::size_t>(i)], d);
    }
    if (input_bn_) input_bn_->backward(cache.input_bn, d);
  }

  void zero_grad() {
    for (Tensor* t : parameters())
      std::fill(t->g.begin(), t->g.end(), 0.0);
  }

  // Fixed order; the optimizer and checkpoints rely on it being stable.
  std::vector<Tensor*> parameters() {
    std::vector<Tensor*> ps;
    if (input_bn_) {
      ps.push_back(&input_bn_->gamma);
      ps.push_back(&input_bn_->beta);
    }
    for (auto& blk : blocks_) {
      ps.push_back(&blk.fc.w);
      ps.push_back(&blk.fc.b);
      if (blk.bn) {
        ps.push_back(&blk.bn->gamma);
        ps.push_back(&blk.bn->beta);
      }
    }
    ps.push_back(&output_.w);
    ps.push_back(&output_.b);
    return ps;
  }

  std::vector<const Tensor*> parameters() const {
    auto* self = const_cast<QNetwork*>(this);
    std::vector<const Tensor*> ps;
    for (Tensor* t : self->parameters()) ps.push_back(t);
    return ps;
  }

  void copy_into(QNetwork& dst) const {
    if (!(spec_ == dst.spec_)) throw std::runtime_error("network spec mismatch on copy");
    dst.input_bn_ = input_bn_;
    dst.blocks_ = blocks_;
    dst.output_ = output_;
  }

  QNetwork clone() const {
    QNetwork out;
    out.spec_ = spec_;
    out.input_bn_ = input_bn_;
    out.blocks_ = blocks_;
    out.output_ = output_;
    return out;
  }

  // Structure access for transfer and checkpoints.
  std::optional<nn::BatchNorm>& input_bn() { return input_bn_; }
  const std::optional<nn::BatchNorm>& input_bn() const { return input_bn_; }
  std::vector<Block>& hidden_blocks() { return blocks_; }
  const std::vector<Block>& hidden_blocks() const { return blocks_; }
  nn::Linear& output_layer() { return output_; }
  const nn::Linear& output_layer() const { return output_; }

 private:
  void check_input(const Matrix& x) const {
    if (x.cols != spec_.input_dim)
      throw std::runtime_error("input dimension mismatch: got " +
                               std::to_string(x.cols) + ", expected " +
                               std::to_string(spec_.input_dim));
  }

  NetworkSpec spec_;
  std::optional<nn::BatchNorm> input_bn_;
  std::vector<Block> blocks_;
  nn::Linear output_;
};

// Mean squared error on the selected action outputs only; gradients flow
// through exactly one output per row. Returns the loss and fills d_out.
inline double masked_squared_loss(const Matrix& q, std::span<const int> actions,
                                  std::span<const double> targets, Matrix& d_out) {
  const int n = q.rows;
  d_out = Matrix(n, q.cols);
  double loss = 0.0;
  for (int r = 0; r < n; ++r) {
    const double diff = q.at(r, actions[r]) - targets[r];
    if (!std::isfinite(diff))
      throw std::runtime_error("non-finite loss at batch index " + std::to_string(r));
    loss += diff * diff;
    d_out.at(r, actions[r]) = 2.0 * diff / n;
  }
  return loss / n;
}

}  // namespace rlminer
