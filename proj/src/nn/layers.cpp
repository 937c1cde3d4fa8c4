#include "stconv/nn/layers.hpp"

#include <algorithm>
#include <cmath>

namespace stconv::nn {

Tensor relu_forward(const Tensor& input) {
  Tensor out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) out[i] = input[i] > 0.0f ? input[i] : 0.0f;
  return out;
}

Tensor relu_backward(const Tensor& input, const Tensor& grad_out) {
  require(input.shape() == grad_out.shape(), ErrorCode::shape_mismatch,
          "relu grad_out shape mismatch");
  Tensor grad(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) grad[i] = input[i] > 0.0f ? grad_out[i] : 0.0f;
  return grad;
}

Tensor softmax(const Tensor& input) {
  require(input.rank() == 2, ErrorCode::shape_mismatch,
          "softmax expects N x K, got " + shape_to_string(input.shape()));
  const std::size_t rows = input.dim(0), k = input.dim(1);
  Tensor out(input.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const float* x = input.data() + r * k;
    float* y = out.data() + r * k;
    const float peak = *std::max_element(x, x + k);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) total += std::exp(static_cast<double>(x[i]) - peak);
    for (std::size_t i = 0; i < k; ++i) {
      y[i] = static_cast<float>(std::exp(static_cast<double>(x[i]) - peak) / total);
    }
  }
  return out;
}

Tensor softmax_backward(const Tensor& probs, const Tensor& grad_out) {
  require(probs.shape() == grad_out.shape() && probs.rank() == 2, ErrorCode::shape_mismatch,
          "softmax grad_out shape mismatch");
  const std::size_t rows = probs.dim(0), k = probs.dim(1);
  Tensor grad(probs.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const float* p = probs.data() + r * k;
    const float* g = grad_out.data() + r * k;
    double inner = 0.0;
    for (std::size_t i = 0; i < k; ++i) inner += static_cast<double>(p[i]) * g[i];
    for (std::size_t i = 0; i < k; ++i) {
      grad[r * k + i] = static_cast<float>(p[i] * (g[i] - inner));
    }
  }
  return grad;
}

BatchNormState BatchNormState::identity(std::size_t channels) {
  BatchNormState s;
  s.gamma = full({channels}, 1.0f);
  s.beta = zeros({channels});
  s.running_mean = zeros({channels});
  s.running_var = full({channels}, 1.0f);
  return s;
}

namespace {

struct ChannelLayout {
  std::size_t batch, channels, inner;
};

ChannelLayout channel_layout(const Tensor& input, const BatchNormState& state) {
  require(input.rank() >= 2, ErrorCode::shape_mismatch, "batchnorm expects rank >= 2");
  const std::size_t channels = input.dim(1);
  for (const Tensor* t : {&state.gamma, &state.beta, &state.running_mean, &state.running_var}) {
    require(t->shape() == Shape{channels}, ErrorCode::shape_mismatch,
            "batchnorm parameter length does not match channel count " +
                std::to_string(channels));
  }
  return {input.dim(0), channels, input.size() / (input.dim(0) * channels)};
}

}  // namespace

Tensor batchnorm_forward(const Tensor& input, BatchNormState& state, Mode mode,
                         BatchNormCache* cache) {
  require(state.eps > 0.0f, ErrorCode::invalid_config, "batchnorm eps must be > 0");
  const auto [batch, channels, inner] = channel_layout(input, state);
  const std::size_t count = batch * inner;
  Tensor out(input.shape());
  if (cache) {
    cache->normalized = Tensor(input.shape());
    cache->inv_std.assign(channels, 0.0f);
  }
  for (std::size_t c = 0; c < channels; ++c) {
    double mean, var;
    if (mode == Mode::train) {
      double sum = 0.0;
      for (std::size_t n = 0; n < batch; ++n) {
        const float* x = input.data() + (n * channels + c) * inner;
        for (std::size_t i = 0; i < inner; ++i) sum += x[i];
      }
      mean = sum / static_cast<double>(count);
      double sq = 0.0;
      for (std::size_t n = 0; n < batch; ++n) {
        const float* x = input.data() + (n * channels + c) * inner;
        for (std::size_t i = 0; i < inner; ++i) {
          const double d = x[i] - mean;
          sq += d * d;
        }
      }
      var = sq / static_cast<double>(count);
      state.running_mean[c] = static_cast<float>(state.momentum * state.running_mean[c] +
                                                 (1.0 - state.momentum) * mean);
      state.running_var[c] = static_cast<float>(state.momentum * state.running_var[c] +
                                                (1.0 - state.momentum) * var);
    } else {
      mean = state.running_mean[c];
      var = state.running_var[c];
    }
    const double inv_std = 1.0 / std::sqrt(var + static_cast<double>(state.eps));
    const double gamma = state.gamma[c], beta = state.beta[c];
    if (cache) cache->inv_std[c] = static_cast<float>(inv_std);
    for (std::size_t n = 0; n < batch; ++n) {
      const std::size_t base = (n * channels + c) * inner;
      for (std::size_t i = 0; i < inner; ++i) {
        const double xhat = (input[base + i] - mean) * inv_std;
        if (cache) cache->normalized[base + i] = static_cast<float>(xhat);
        out[base + i] = static_cast<float>(gamma * xhat + beta);
      }
    }
  }
  return out;
}

BatchNormGrads batchnorm_backward(const Tensor& grad_out, const BatchNormState& state,
                                  const BatchNormCache& cache) {
  require(grad_out.shape() == cache.normalized.shape(), ErrorCode::shape_mismatch,
          "batchnorm grad_out shape mismatch");
  const auto [batch, channels, inner] = channel_layout(grad_out, state);
  const double count = static_cast<double>(batch * inner);
  BatchNormGrads grads{Tensor(grad_out.shape()), Tensor({channels}), Tensor({channels})};
  for (std::size_t c = 0; c < channels; ++c) {
    double sum_g = 0.0, sum_gx = 0.0;
    for (std::size_t n = 0; n < batch; ++n) {
      const std::size_t base = (n * channels + c) * inner;
      for (std::size_t i = 0; i < inner; ++i) {
        sum_g += grad_out[base + i];
        sum_gx += static_cast<double>(grad_out[base + i]) * cache.normalized[base + i];
      }
    }
    grads.beta[c] = static_cast<float>(sum_g);
    grads.gamma[c] = static_cast<float>(sum_gx);
    const double scale = state.gamma[c] * static_cast<double>(cache.inv_std[c]);
    const double mean_g = sum_g / count, mean_gx = sum_gx / count;
    for (std::size_t n = 0; n < batch; ++n) {
      const std::size_t base = (n * channels + c) * inner;
      for (std::size_t i = 0; i < inner; ++i) {
        grads.input[base + i] = static_cast<float>(
            scale * (grad_out[base + i] - mean_g - cache.normalized[base + i] * mean_gx));
      }
    }
  }
  return grads;
}

LinearParams LinearParams::initialized(std::size_t in_features, std::size_t out_features,
                                       Rng& rng) {
  const float bound = static_cast<float>(std::sqrt(1.0 / static_cast<double>(in_features)));
  LinearParams p;
  p.weights = fill_uniform({in_features, out_features}, -bound, bound, rng);
  p.bias = fill_uniform({out_features}, -bound, bound, rng);
  return p;
}

namespace {

constexpr std::size_t kFeatureBlock = 256;

std::pair<std::size_t, std::size_t> linear_dims(const Tensor& input, const LinearParams& params) {
  require(input.rank() >= 2, ErrorCode::shape_mismatch, "fully connected input needs a batch axis");
  require(params.weights.rank() == 2, ErrorCode::shape_mismatch, "weights must be D x K");
  const std::size_t batch = input.dim(0);
  const std::size_t features = input.size() / batch;
  require(features == params.weights.dim(0), ErrorCode::shape_mismatch,
          "fully connected input width " + std::to_string(features) + " does not match weights " +
              shape_to_string(params.weights.shape()));
  require(params.bias.shape() == Shape{params.weights.dim(1)}, ErrorCode::shape_mismatch,
          "fully connected bias length mismatch");
  return {batch, features};
}

}  // namespace

Tensor fully_connected_forward(const Tensor& input, const LinearParams& params,
                               const Executor& executor) {
  const auto [batch, features] = linear_dims(input, params);
  const std::size_t outputs = params.weights.dim(1);
  Tensor out({batch, outputs});
  const std::size_t blocks = (outputs + kFeatureBlock - 1) / kFeatureBlock;
  executor.parallel_for(blocks, [&](std::size_t b) {
    const std::size_t k0 = b * kFeatureBlock;
    const std::size_t width = std::min(kFeatureBlock, outputs - k0);
    for (std::size_t n = 0; n < batch; ++n) {
      float* y = out.data() + n * outputs + k0;
      std::copy_n(params.bias.data() + k0, width, y);
      const float* x = input.data() + n * features;
      for (std::size_t d = 0; d < features; ++d) {
        const float xd = x[d];
        if (xd == 0.0f) continue;
        const float* w = params.weights.data() + d * outputs + k0;
        for (std::size_t j = 0; j < width; ++j) y[j] += xd * w[j];
      }
    }
  });
  return out;
}

LinearGrads fully_connected_backward(const Tensor& input, const LinearParams& params,
                                     const Tensor& grad_out, const Executor& executor) {
  const auto [batch, features] = linear_dims(input, params);
  const std::size_t outputs = params.weights.dim(1);
  require(grad_out.shape() == Shape{batch, outputs}, ErrorCode::shape_mismatch,
          "fully connected grad_out shape mismatch");
  LinearGrads grads{Tensor(input.shape()), Tensor(params.weights.shape()), Tensor({outputs})};
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t k = 0; k < outputs; ++k) grads.bias[k] += grad_out[n * outputs + k];
  }
  const std::size_t blocks = (features + kFeatureBlock - 1) / kFeatureBlock;
  executor.parallel_for(blocks, [&](std::size_t b) {
    const std::size_t d0 = b * kFeatureBlock;
    const std::size_t d1 = std::min(features, d0 + kFeatureBlock);
    for (std::size_t d = d0; d < d1; ++d) {
      const float* w = params.weights.data() + d * outputs;
      float* gw = grads.weights.data() + d * outputs;
      for (std::size_t n = 0; n < batch; ++n) {
        const float* g = grad_out.data() + n * outputs;
        const float xd = input[n * features + d];
        float acc = 0.0f;
        for (std::size_t k = 0; k < outputs; ++k) {
          acc += g[k] * w[k];
          gw[k] += xd * g[k];
        }
        grads.input[n * features + d] = acc;
      }
    }
  });
  return grads;
}

}  // namespace stconv::nn
