#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "stconv/tensor.hpp"

namespace stconv::nn {

/// Step-decay SGD. The decay interval is counted in whatever unit the caller
/// passes as `step` (iterations or epochs).
struct SgdConfig {
  double learning_rate = 0.003;
  double decay_factor = 1.0;
  std::size_t decay_interval = 1;
  double momentum = 0.9;
  std::size_t batch_size = 1;

  void validate() const;
};

/// learning_rate * decay_factor ^ floor(step / decay_interval)
double scheduled_learning_rate(const SgdConfig& config, std::size_t step);

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;      // allocated on first accumulation
  Tensor velocity;  // allocated on first step

  void accumulate(const Tensor& g);
  void zero_grad();
};

/// velocity = momentum * velocity + grad; value -= lr(step) * velocity.
/// Parameters without a gradient are left untouched.
void sgd_step(std::span<Parameter* const> params, const SgdConfig& config, std::size_t step);

}  // namespace stconv::nn
