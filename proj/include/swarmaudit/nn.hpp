#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "swarmaudit/dataset.hpp"
#include "swarmaudit/errors.hpp"
#include "swarmaudit/matrix.hpp"
#include "swarmaudit/rng.hpp"

namespace swarmaudit::nn {

enum class Activation { kRelu, kIdentity };
enum class Mode { kTrain, kEval };

struct LayerSpec {
  int in_dim = 0;
  int out_dim = 0;
  Activation activation = Activation::kRelu;
  double dropout_rate = 0.0;
};

inline void validate_arch(const std::vector<LayerSpec>& arch) {
  if (arch.empty()) throw ArgumentError("arch: at least one layer required");
  for (std::size_t k = 0; k < arch.size(); ++k) {
    if (arch[k].in_dim <= 0 || arch[k].out_dim <= 0)
      throw ArgumentError("arch: layer dims must be positive");
    if (arch[k].dropout_rate < 0.0 || arch[k].dropout_rate >= 1.0)
      throw ArgumentError("arch: dropout_rate must be in [0,1)");
    if (k > 0 && arch[k].in_dim != arch[k - 1].out_dim)
      throw ShapeError("arch: layer " + std::to_string(k) + " in_dim does not chain");
  }
}

// ReLU hidden stack with an identity head; softmax is applied by forward().
inline std::vector<LayerSpec> dense_stack(int input_dim, const std::vector<int>& hidden,
                                          int classes) {
  std::vector<LayerSpec> arch;
  int prev = input_dim;
  for (int h : hidden) {
    arch.push_back({prev, h, Activation::kRelu, 0.0});
    prev = h;
  }
  arch.push_back({prev, classes, Activation::kIdentity, 0.0});
  validate_arch(arch);
  return arch;
}

struct LayerParams {
  Matrix weights;               // out_dim x in_dim
  std::vector<double> biases;   // out_dim
};

// Flat per-layer tensors; the unit exchanged during aggregation.
struct ModelParams {
  std::vector<LayerParams> layers;

  bool same_shape(const ModelParams& other) const {
    if (layers.size() != other.layers.size()) return false;
    for (std::size_t k = 0; k < layers.size(); ++k) {
      if (!layers[k].weights.same_shape(other.layers[k].weights)) return false;
      if (layers[k].biases.size() != other.layers[k].biases.size()) return false;
    }
    return true;
  }

  bool all_finite() const {
    for (const auto& l : layers) {
      if (!l.weights.all_finite()) return false;
      for (double b : l.biases)
        if (!std::isfinite(b)) return false;
    }
    return true;
  }
};

struct Mlp {
  std::vector<LayerSpec> arch;
  ModelParams params;

  int input_dim() const { return arch.front().in_dim; }
  int output_dim() const { return arch.back().out_dim; }
};

using PredictionVector = std::vector<double>;

struct TrainConfig {
  double learning_rate = 0.05;
  double l2_lambda = 0.0;
  int epochs = 1;
  int batch_size = 32;
  std::uint64_t seed = 0;
};

inline void validate(const TrainConfig& cfg) {
  if (cfg.learning_rate <= 0.0) throw ArgumentError("train_cfg: learning_rate must be > 0");
  if (cfg.l2_lambda < 0.0) throw ArgumentError("train_cfg: l2_lambda must be >= 0");
  if (cfg.epochs < 0) throw ArgumentError("train_cfg: epochs must be >= 0");
  if (cfg.batch_size < 1) throw ArgumentError("train_cfg: batch_size must be >= 1");
}

// Uniform in [-sqrt(6/(in+out)), +sqrt(6/(in+out))], biases zero.
inline Mlp make_mlp(const std::vector<LayerSpec>& arch, Rng& rng) {
  validate_arch(arch);
  Mlp m;
  m.arch = arch;
  m.params.layers.reserve(arch.size());
  for (const auto& spec : arch) {
    LayerParams layer;
    layer.weights = Matrix(spec.out_dim, spec.in_dim);
    layer.biases.assign(spec.out_dim, 0.0);
    const double limit = std::sqrt(6.0 / (spec.in_dim + spec.out_dim));
    for (double& w : layer.weights.data) w = (2.0 * rng.uniform() - 1.0) * limit;
    m.params.layers.push_back(std::move(layer));
  }
  return m;
}

inline constexpr double kLogClamp = 1e-12;

// Max-subtracted softmax, in place.
inline void softmax(std::vector<double>& z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

namespace detail {

// Per-layer forward state kept for backprop.
struct LayerCache {
  std::vector<double> pre;    // z = W a_prev + b
  std::vector<double> mult;   // dropout multiplier per unit (1 or 1/(1-p) or 0)
  std::vector<double> post;   // a = mult .* act(z)
};

inline void affine(const LayerParams& layer, const std::vector<double>& in,
                   std::vector<double>& out) {
  const std::size_t rows = layer.weights.rows;
  const std::size_t cols = layer.weights.cols;
  out.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    double s = layer.biases[i];
    const double* w = layer.weights.row(i);
    for (std::size_t j = 0; j < cols; ++j) s += w[j] * in[j];
    out[i] = s;
  }
}

inline double activate(double z, Activation a) {
  return a == Activation::kRelu ? (z > 0.0 ? z : 0.0) : z;
}

inline double activate_grad(double z, Activation a) {
  return a == Activation::kRelu ? (z > 0.0 ? 1.0 : 0.0) : 1.0;
}

// Runs the dense stack for one sample, filling `caches` when non-null.
inline std::vector<double> run_stack(const Mlp& m, std::span<const double> input, Mode mode,
                                     Rng* rng, std::vector<LayerCache>* caches) {
  if (static_cast<int>(input.size()) != m.input_dim())
    throw ShapeError("forward: input length " + std::to_string(input.size()) +
                     " != first layer in_dim " + std::to_string(m.input_dim()));
  if (mode == Mode::kTrain && rng == nullptr)
    throw ArgumentError("forward: train mode requires an rng");

  std::vector<double> a(input.begin(), input.end());
  std::vector<double> z;
  for (std::size_t k = 0; k < m.arch.size(); ++k) {
    const auto& spec = m.arch[k];
    affine(m.params.layers[k], a, z);
    std::vector<double> mult(spec.out_dim, 1.0);
    if (mode == Mode::kTrain && spec.dropout_rate > 0.0) {
      const double keep = 1.0 - spec.dropout_rate;
      for (double& mj : mult) mj = (rng->uniform() < keep) ? 1.0 / keep : 0.0;
    }
    std::vector<double> out(spec.out_dim);
    for (int j = 0; j < spec.out_dim; ++j)
      out[j] = mult[j] * activate(z[j], spec.activation);
    if (caches) {
      LayerCache c;
      c.pre = z;
      c.mult = std::move(mult);
      c.post = out;
      caches->push_back(std::move(c));
    }
    a = std::move(out);
  }
  return a;
}

}  // namespace detail

// Softmax-normalized class probabilities for one sample. Eval mode is
// deterministic; inverted dropout rescales at train time so eval applies no
// mask and no rescale.
inline PredictionVector forward(const Mlp& m, std::span<const double> input, Mode mode = Mode::kEval,
                                Rng* rng = nullptr) {
  auto out = detail::run_stack(m, input, mode, rng, nullptr);
  softmax(out);
  for (double p : out)
    if (!std::isfinite(p)) throw NumericError("forward: non-finite activation");
  return out;
}

inline std::vector<PredictionVector> predict_dataset(const Mlp& m, const Dataset& ds) {
  std::vector<PredictionVector> preds;
  preds.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i)
    preds.push_back(forward(m, std::span<const double>(ds.features.row(i), ds.dim())));
  return preds;
}

inline double accuracy(const Mlp& m, const Dataset& ds) {
  if (ds.empty()) throw ArgumentError("accuracy: empty dataset");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto p = forward(m, std::span<const double>(ds.features.row(i), ds.dim()));
    const auto arg = std::max_element(p.begin(), p.end()) - p.begin();
    if (static_cast<int>(arg) == ds.labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(ds.size());
}

inline ModelParams zeros_like(const ModelParams& p) {
  ModelParams g;
  g.layers.reserve(p.layers.size());
  for (const auto& l : p.layers) {
    LayerParams gl;
    gl.weights = Matrix(l.weights.rows, l.weights.cols, 0.0);
    gl.biases.assign(l.biases.size(), 0.0);
    g.layers.push_back(std::move(gl));
  }
  return g;
}

struct LossGrads {
  double loss = 0.0;
  ModelParams grads;
};

// Mean cross-entropy over the batch plus (l2_lambda/2) * sum ||W||^2.
// Dropout masks for train-mode layers are drawn from `rng` in sample order,
// so the result is a pure function of (model, batch, cfg, rng state).
inline LossGrads loss_and_gradients(const Mlp& m, const Matrix& inputs,
                                    const std::vector<int>& labels, const TrainConfig& cfg,
                                    Rng& rng) {
  if (labels.empty()) throw ArgumentError("loss_and_gradients: empty batch");
  if (inputs.rows != labels.size())
    throw ShapeError("loss_and_gradients: inputs rows != labels size");
  const int classes = m.output_dim();
  for (int y : labels)
    if (y < 0 || y >= classes) throw ArgumentError("loss_and_gradients: label out of range");

  const double inv_n = 1.0 / static_cast<double>(labels.size());
  LossGrads out;
  out.grads = zeros_like(m.params);

  std::vector<detail::LayerCache> caches;
  for (std::size_t s = 0; s < labels.size(); ++s) {
    caches.clear();
    auto logits = detail::run_stack(
        m, std::span<const double>(inputs.row(s), inputs.cols), Mode::kTrain, &rng, &caches);
    auto probs = logits;
    softmax(probs);

    out.loss -= inv_n * std::log(std::max(probs[labels[s]], kLogClamp));

    // delta on the final post-dropout activations
    std::vector<double> delta = probs;
    delta[labels[s]] -= 1.0;
    for (double& d : delta) d *= inv_n;

    for (std::size_t k = m.arch.size(); k-- > 0;) {
      const auto& spec = m.arch[k];
      const auto& cache = caches[k];
      for (int j = 0; j < spec.out_dim; ++j)
        delta[j] *= cache.mult[j] * detail::activate_grad(cache.pre[j], spec.activation);

      const double* prev = (k == 0) ? inputs.row(s) : caches[k - 1].post.data();
      auto& gl = out.grads.layers[k];
      for (int j = 0; j < spec.out_dim; ++j) {
        double* gw = gl.weights.row(j);
        for (int i = 0; i < spec.in_dim; ++i) gw[i] += delta[j] * prev[i];
        gl.biases[j] += delta[j];
      }

      if (k > 0) {
        std::vector<double> next(spec.in_dim, 0.0);
        const auto& w = m.params.layers[k].weights;
        for (int j = 0; j < spec.out_dim; ++j) {
          const double* wr = w.row(j);
          for (int i = 0; i < spec.in_dim; ++i) next[i] += wr[i] * delta[j];
        }
        delta = std::move(next);
      }
    }
  }

  if (cfg.l2_lambda > 0.0) {
    for (std::size_t k = 0; k < m.params.layers.size(); ++k) {
      const auto& w = m.params.layers[k].weights;
      out.loss += 0.5 * cfg.l2_lambda * w.squared_norm();
      auto& gw = out.grads.layers[k].weights;
      for (std::size_t i = 0; i < w.data.size(); ++i) gw.data[i] += cfg.l2_lambda * w.data[i];
    }
  }

  if (!std::isfinite(out.loss)) throw NumericError("loss_and_gradients: non-finite loss");
  return out;
}

// params' = params - learning_rate * grads. L2 is already folded into grads.
inline ModelParams sgd_step(const ModelParams& params, const ModelParams& grads,
                            const TrainConfig& cfg) {
  if (!params.same_shape(grads)) throw ShapeError("sgd_step: shape mismatch");
  ModelParams out = params;
  for (std::size_t k = 0; k < out.layers.size(); ++k) {
    auto& l = out.layers[k];
    const auto& g = grads.layers[k];
    for (std::size_t i = 0; i < l.weights.data.size(); ++i)
      l.weights.data[i] -= cfg.learning_rate * g.weights.data[i];
    for (std::size_t i = 0; i < l.biases.size(); ++i)
      l.biases[i] -= cfg.learning_rate * g.biases[i];
  }
  return out;
}

// cfg.epochs epochs of shuffled mini-batch SGD; shuffling and dropout masks
// are driven only by cfg.seed.
inline Mlp train_local(const Mlp& model, const Dataset& ds, const TrainConfig& cfg) {
  validate(cfg);
  if (ds.empty()) throw ArgumentError("train_local: empty dataset");

  Mlp m = model;
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      Matrix batch(stop - start, ds.dim());
      std::vector<int> labels(stop - start);
      for (std::size_t r = start; r < stop; ++r) {
        std::copy(ds.features.row(order[r]), ds.features.row(order[r]) + ds.dim(),
                  batch.row(r - start));
        labels[r - start] = ds.labels[order[r]];
      }
      const auto lg = loss_and_gradients(m, batch, labels, cfg, rng);
      m.params = sgd_step(m.params, lg.grads, cfg);
    }
  }
  return m;
}

}  // namespace swarmaudit::nn
