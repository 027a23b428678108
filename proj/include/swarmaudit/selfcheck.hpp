#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "swarmaudit/attacks.hpp"
#include "swarmaudit/matrix.hpp"
#include "swarmaudit/nn.hpp"
#include "swarmaudit/rng.hpp"

// Independent oracles behind the `gradcheck` and `mmdcheck` self-test
// commands. The numeric routines here recompute everything from first
// principles (central differences, naive double sums) and must stay
// independent of the code paths they validate.
namespace swarmaudit::selfcheck {

struct GradCheckResult {
  double max_rel_error = 0.0;
  int trials = 0;
  bool pass = false;
};

namespace detail {

inline double loss_at(const nn::Mlp& m, const Matrix& x, const std::vector<int>& y,
                      const nn::TrainConfig& cfg, std::uint64_t mask_seed) {
  Rng rng(mask_seed);
  return nn::loss_and_gradients(m, x, y, cfg, rng).loss;
}

// Relative error with an absolute floor for near-zero pairs.
inline double rel_error(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale < 1e-8) return std::abs(a - b);
  return std::abs(a - b) / scale;
}

// Smallest |pre-activation| over all ReLU units; finite differences are only
// meaningful away from the kink.
inline double min_relu_margin(const nn::Mlp& m, const Matrix& x, std::uint64_t mask_seed) {
  double margin = 1e30;
  Rng rng(mask_seed);
  for (std::size_t s = 0; s < x.rows; ++s) {
    std::vector<nn::detail::LayerCache> caches;
    nn::detail::run_stack(m, std::span<const double>(x.row(s), x.cols), nn::Mode::kTrain, &rng,
                          &caches);
    for (std::size_t k = 0; k < m.arch.size(); ++k) {
      if (m.arch[k].activation != nn::Activation::kRelu) continue;
      for (double z : caches[k].pre) margin = std::min(margin, std::abs(z));
    }
  }
  return margin;
}

struct GradFixture {
  nn::Mlp model;
  Matrix inputs;
  std::vector<int> labels;
  nn::TrainConfig cfg;
  std::uint64_t mask_seed = 0;
};

inline GradFixture random_fixture(std::uint64_t seed, double h) {
  // Redraw until every ReLU pre-activation sits clear of the kink.
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(derive_seed(seed, attempt));
    GradFixture f;
    const int in_dim = 3 + static_cast<int>(rng.uniform_int(5));
    const int classes = 2 + static_cast<int>(rng.uniform_int(4));
    const int depth = 1 + static_cast<int>(rng.uniform_int(2));
    std::vector<nn::LayerSpec> arch;
    int prev = in_dim;
    for (int d = 0; d < depth; ++d) {
      const int width = 4 + static_cast<int>(rng.uniform_int(6));
      const double dropout = (rng.uniform() < 0.3) ? 0.2 : 0.0;
      arch.push_back({prev, width, nn::Activation::kRelu, dropout});
      prev = width;
    }
    arch.push_back({prev, classes, nn::Activation::kIdentity, 0.0});
    f.model = nn::make_mlp(arch, rng);

    const int batch = 2 + static_cast<int>(rng.uniform_int(5));
    f.inputs = Matrix(batch, in_dim);
    for (double& v : f.inputs.data) v = rng.normal();
    f.labels.resize(batch);
    for (int& y : f.labels) y = static_cast<int>(rng.uniform_int(classes));

    f.cfg.l2_lambda = (rng.uniform() < 0.5) ? 0.01 : 0.0;
    f.cfg.learning_rate = 0.1;
    f.mask_seed = derive_seed(seed, 0xF00D + attempt);
    if (min_relu_margin(f.model, f.inputs, f.mask_seed) > 50.0 * h) return f;
  }
}

}  // namespace detail

// Central finite differences (step h) of the training loss with dropout
// masks pinned by the fixture seed, compared against analytic gradients.
inline GradCheckResult gradient_check(int trials, std::uint64_t seed, double h = 1e-5,
                                      double tol = 1e-4) {
  GradCheckResult result;
  result.trials = trials;
  for (int t = 0; t < trials; ++t) {
    auto f = detail::random_fixture(derive_seed(seed, 31337 + t), h);
    Rng grad_rng(f.mask_seed);
    const auto analytic = nn::loss_and_gradients(f.model, f.inputs, f.labels, f.cfg, grad_rng);

    for (std::size_t k = 0; k < f.model.params.layers.size(); ++k) {
      auto check_param = [&](double& slot, double analytic_grad) {
        const double saved = slot;
        slot = saved + h;
        const double up = detail::loss_at(f.model, f.inputs, f.labels, f.cfg, f.mask_seed);
        slot = saved - h;
        const double down = detail::loss_at(f.model, f.inputs, f.labels, f.cfg, f.mask_seed);
        slot = saved;
        const double numeric = (up - down) / (2.0 * h);
        result.max_rel_error = std::max(result.max_rel_error,
                                        detail::rel_error(analytic_grad, numeric));
      };
      auto& layer = f.model.params.layers[k];
      for (std::size_t i = 0; i < layer.weights.data.size(); ++i)
        check_param(layer.weights.data[i], analytic.grads.layers[k].weights.data[i]);
      for (std::size_t i = 0; i < layer.biases.size(); ++i)
        check_param(layer.biases[i], analytic.grads.layers[k].biases[i]);
    }
  }
  result.pass = result.max_rel_error < tol;
  return result;
}

// Naive O(n^2) double-sum MMD with its own kernel evaluation; the oracle for
// the kernel-sum implementation.
inline double mmd_bruteforce(const std::vector<nn::PredictionVector>& a,
                             const std::vector<nn::PredictionVector>& b, double sigma,
                             int exponent) {
  auto kern = [&](const nn::PredictionVector& x, const nn::PredictionVector& y) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
    const double num = exponent == 2 ? d2 : std::sqrt(d2);
    return std::exp(-num / (2.0 * sigma * sigma));
  };
  double s_aa = 0.0, s_bb = 0.0, s_ab = 0.0;
  for (const auto& x : a)
    for (const auto& y : a) s_aa += kern(x, y);
  for (const auto& x : b)
    for (const auto& y : b) s_bb += kern(x, y);
  for (const auto& x : a)
    for (const auto& y : b) s_ab += kern(x, y);
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  return std::sqrt(std::max(0.0, s_aa / (n * n) + s_bb / (m * m) - 2.0 * s_ab / (n * m)));
}

struct MmdCheckResult {
  double max_abs_error = 0.0;   // implementation vs brute force
  double max_self = 0.0;        // mmd(a,a)
  double max_asymmetry = 0.0;   // |mmd(a,b) - mmd(b,a)|
  int trials = 0;
  bool pass = false;
};

inline MmdCheckResult mmd_check(int trials, std::uint64_t seed, std::size_t max_size = 200) {
  MmdCheckResult result;
  result.trials = trials;
  Rng rng(seed);
  for (int t = 0; t < trials; ++t) {
    const std::size_t dim = 2 + rng.uniform_int(8);
    const std::size_t na = 1 + rng.uniform_int(max_size);
    const std::size_t nb = 1 + rng.uniform_int(max_size);
    const int exponent = (t % 2 == 0) ? 2 : 1;
    const double sigma = 0.25 + 2.0 * rng.uniform();
    const double shift = rng.normal();

    auto draw = [&](std::size_t n, double mean) {
      std::vector<nn::PredictionVector> v(n, nn::PredictionVector(dim));
      for (auto& row : v)
        for (auto& x : row) x = rng.normal(mean, 1.0);
      return v;
    };
    const auto a = draw(na, 0.0);
    const auto b = draw(nb, shift);

    const double got = attacks::mmd_with_sigma(a, b, sigma, exponent);
    const double want = mmd_bruteforce(a, b, sigma, exponent);
    result.max_abs_error = std::max(result.max_abs_error, std::abs(got - want));
    result.max_asymmetry = std::max(
        result.max_asymmetry, std::abs(got - attacks::mmd_with_sigma(b, a, sigma, exponent)));
    result.max_self = std::max(result.max_self, attacks::mmd_with_sigma(a, a, sigma, exponent));
  }
  result.pass =
      result.max_abs_error < 1e-12 && result.max_self <= 1e-9 && result.max_asymmetry < 1e-12;
  return result;
}

}  // namespace swarmaudit::selfcheck
