#pragma once

#include <vector>

#include "stconv/executor.hpp"
#include "stconv/rng.hpp"
#include "stconv/tensor.hpp"

namespace stconv::nn {

Tensor relu_forward(const Tensor& input);
/// Passes grad_out where input > 0.
Tensor relu_backward(const Tensor& input, const Tensor& grad_out);

/// Row-wise softmax of an N x K tensor, stabilized by subtracting the row max.
Tensor softmax(const Tensor& input);
Tensor softmax_backward(const Tensor& probs, const Tensor& grad_out);

enum class Mode { train, infer };

/// Per-channel state for batch normalization over axis 1.
struct BatchNormState {
  Tensor gamma;
  Tensor beta;
  Tensor running_mean;
  Tensor running_var;
  float eps = 1e-5f;
  /// running = momentum * running + (1 - momentum) * batch
  float momentum = 0.9f;

  static BatchNormState identity(std::size_t channels);
};

struct BatchNormCache {
  Tensor normalized;
  std::vector<float> inv_std;
};

/// Train mode normalizes with batch statistics over every non-channel axis
/// and updates the running statistics; infer mode uses the running ones.
Tensor batchnorm_forward(const Tensor& input, BatchNormState& state, Mode mode,
                         BatchNormCache* cache = nullptr);

struct BatchNormGrads {
  Tensor input;
  Tensor gamma;
  Tensor beta;
};

/// Gradient of the train-mode map (batch statistics).
BatchNormGrads batchnorm_backward(const Tensor& grad_out, const BatchNormState& state,
                                  const BatchNormCache& cache);

struct LinearParams {
  Tensor weights;  // D x K
  Tensor bias;     // K

  static LinearParams initialized(std::size_t in_features, std::size_t out_features, Rng& rng);
};

/// input is N x D (higher ranks are flattened after the batch axis).
Tensor fully_connected_forward(const Tensor& input, const LinearParams& params,
                               const Executor& executor = Executor::serial());

struct LinearGrads {
  Tensor input;  // same shape as the forward input
  Tensor weights;
  Tensor bias;
};

LinearGrads fully_connected_backward(const Tensor& input, const LinearParams& params,
                                     const Tensor& grad_out,
                                     const Executor& executor = Executor::serial());

}  // namespace stconv::nn
