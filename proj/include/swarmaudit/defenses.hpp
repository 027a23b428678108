#pragma once

#include <utility>
#include <vector>

#include "swarmaudit/errors.hpp"
#include "swarmaudit/nn.hpp"

namespace swarmaudit::defense {

struct DefenseSpec {
  std::vector<double> dropout_rates;  // per hidden layer, empty = off
  double l2_lambda = 0.0;

  void validate() const {
    for (double r : dropout_rates)
      if (r < 0.0 || r >= 1.0) throw ArgumentError("defense: dropout rates must be in [0,1)");
    if (l2_lambda < 0.0) throw ArgumentError("defense: l2_lambda must be >= 0");
  }

  bool enabled() const { return !dropout_rates.empty() || l2_lambda != 0.0; }
};

// Returns layer specs with dropout applied after the leading hidden
// activations (shorter rate lists cover a prefix) and the training config
// with l2_lambda overridden. The identity spec returns its inputs unchanged;
// base inputs are never modified.
inline std::pair<std::vector<nn::LayerSpec>, nn::TrainConfig> apply_defense(
    const std::vector<nn::LayerSpec>& base_layers, const nn::TrainConfig& train_cfg,
    const DefenseSpec& spec) {
  spec.validate();
  nn::validate_arch(base_layers);
  const std::size_t hidden = base_layers.size() - 1;  // all but the output layer
  if (spec.dropout_rates.size() > hidden)
    throw ArgumentError("defense: more dropout rates than hidden layers");
  if (!spec.enabled()) return {base_layers, train_cfg};

  std::vector<nn::LayerSpec> layers = base_layers;
  for (std::size_t i = 0; i < spec.dropout_rates.size(); ++i)
    layers[i].dropout_rate = spec.dropout_rates[i];
  nn::TrainConfig cfg = train_cfg;
  cfg.l2_lambda = spec.l2_lambda;
  return {std::move(layers), cfg};
}

}  // namespace swarmaudit::defense
