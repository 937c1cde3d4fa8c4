#include "stconv/nn/sgd.hpp"

#include <algorithm>
#include <cmath>

namespace stconv::nn {

void SgdConfig::validate() const {
  require(learning_rate >= 0.0, ErrorCode::invalid_config, "learning rate must be >= 0");
  require(decay_factor > 0.0 && decay_factor <= 1.0, ErrorCode::invalid_config,
          "decay factor must be in (0, 1]");
  require(decay_interval >= 1, ErrorCode::invalid_config, "decay interval must be >= 1");
  require(momentum >= 0.0 && momentum < 1.0, ErrorCode::invalid_config,
          "momentum must be in [0, 1)");
  require(batch_size >= 1, ErrorCode::invalid_config, "batch size must be >= 1");
}

double scheduled_learning_rate(const SgdConfig& config, std::size_t step) {
  const auto decays = static_cast<double>(step / config.decay_interval);
  return config.learning_rate * std::pow(config.decay_factor, decays);
}

void Parameter::accumulate(const Tensor& g) {
  require(g.shape() == value.shape(), ErrorCode::shape_mismatch,
          "gradient shape does not match parameter " + name);
  if (grad.empty()) {
    grad = g;
    return;
  }
  for (std::size_t i = 0; i < g.size(); ++i) grad[i] += g[i];
}

void Parameter::zero_grad() {
  if (!grad.empty()) std::fill(grad.values().begin(), grad.values().end(), 0.0f);
}

void sgd_step(std::span<Parameter* const> params, const SgdConfig& config, std::size_t step) {
  config.validate();
  const float lr = static_cast<float>(scheduled_learning_rate(config, step));
  const float momentum = static_cast<float>(config.momentum);
  for (Parameter* p : params) {
    if (p->grad.empty()) continue;
    if (p->velocity.empty()) p->velocity = Tensor(p->value.shape());
    auto v = p->velocity.values();
    auto g = p->grad.values();
    auto w = p->value.values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      v[i] = momentum * v[i] + g[i];
      w[i] -= lr * v[i];
    }
  }
}

}  // namespace stconv::nn
