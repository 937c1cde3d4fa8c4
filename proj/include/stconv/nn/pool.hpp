#pragma once

#include <cstdint>
#include <vector>

#include "stconv/nn/geometry.hpp"
#include "stconv/tensor.hpp"

namespace stconv::nn {

struct PoolResult {
  Tensor output;
  /// Flat input index of the winning element for every output element.
  std::vector<std::uint64_t> argmax;
};

/// Max pooling over (T, H, W) windows. Padded positions never win.
PoolResult maxpool3d_forward(const Tensor& input, const Triple& kernel, const Triple& stride,
                             const Triple& padding = {0, 0, 0});

Tensor maxpool3d_backward(const Tensor& grad_out, const std::vector<std::uint64_t>& argmax,
                          const Shape& input_shape);

/// Mean over (T, H, W); output is N x C x 1 x 1 x 1.
Tensor global_avg_pool_forward(const Tensor& input);
Tensor global_avg_pool_backward(const Tensor& grad_out, const Shape& input_shape);

}  // namespace stconv::nn
