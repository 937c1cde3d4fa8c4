#pragma once

#include "stconv/executor.hpp"
#include "stconv/nn/geometry.hpp"
#include "stconv/rng.hpp"
#include "stconv/tensor.hpp"

namespace stconv::nn {

struct Conv3dGeometry {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  Triple kernel = cube(3);
  Triple stride = cube(1);
  Triple padding = cube(0);

  friend bool operator==(const Conv3dGeometry&, const Conv3dGeometry&) = default;
};

/// Weights are [out, in, kt, kh, kw]. An empty bias tensor means no bias.
struct Conv3dParams {
  Conv3dGeometry geometry;
  Tensor weights;
  Tensor bias;

  bool has_bias() const noexcept { return !bias.empty(); }

  /// Uniform fan-in initialization, bound sqrt(1 / (in * kt * kh * kw)).
  static Conv3dParams initialized(const Conv3dGeometry& geometry, bool with_bias, Rng& rng);
  static Conv3dParams zero(const Conv3dGeometry& geometry, bool with_bias);
};

Shape conv3d_output_shape(const Shape& input, const Conv3dGeometry& geometry);

/// Cross-correlation (no kernel flip) over im2col column blocks.
Tensor conv3d_forward(const Tensor& input, const Conv3dParams& params,
                      const Executor& executor = Executor::serial());

/// Direct seven-loop evaluation. Reference for conv3d_forward.
Tensor conv3d_forward_naive(const Tensor& input, const Conv3dParams& params);

struct Conv3dGrads {
  Tensor input;
  Tensor weights;
  Tensor bias;  // empty when the layer has no bias
};

Conv3dGrads conv3d_backward(const Tensor& input, const Conv3dParams& params,
                            const Tensor& grad_out,
                            const Executor& executor = Executor::serial());

Conv3dGrads conv3d_backward_naive(const Tensor& input, const Conv3dParams& params,
                                  const Tensor& grad_out);

}  // namespace stconv::nn
