#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "stconv/net/spec.hpp"

namespace stconv::net {

/// Intermediate channel count that keeps a factorized t x d x d convolution
/// within the parameter budget of the full one:
///   floor(t d^2 n_in n_out / (d^2 n_in + t n_out)).
std::size_t midplane_channels(std::size_t t, std::size_t d, std::size_t n_in, std::size_t n_out);

/// d^2 n_in M + t M n_out for M = midplane_channels(...).
std::size_t factorized_weight_count(std::size_t t, std::size_t d, std::size_t n_in,
                                    std::size_t n_out);
inline std::size_t full_weight_count(std::size_t t, std::size_t d, std::size_t n_in,
                                     std::size_t n_out) {
  return t * d * d * n_in * n_out;
}

/// [spatial 1 x d x d conv (n_in -> M), batchnorm, relu, temporal t x 1 x 1
/// conv (M -> n_out)], shape-preserving padding, no conv biases. The spatial
/// stride goes to the 2D conv and the temporal stride to the 1D conv.
std::vector<LayerSpec> build_2p1d_block(const std::string& name, std::size_t t, std::size_t d,
                                        std::size_t n_in, std::size_t n_out,
                                        Triple stride = {1, 1, 1});

/// The block above wrapped as a single conv2p1d layer.
LayerSpec conv2p1d_layer(const std::string& name, std::size_t t, std::size_t d,
                         std::size_t n_in, std::size_t n_out, Triple stride = {1, 1, 1});

/// Residual block: conv -> bn -> relu -> conv -> bn, plus shortcut, then relu.
/// `factorized` selects (2+1)D or full 3D convolutions. A 1x1x1 strided
/// projection with batchnorm is used when the stride or width changes.
LayerSpec residual_block(const std::string& name, std::size_t n_in, std::size_t n_out,
                         std::size_t stride, bool factorized);

/// C3D: 8 convs (3x3x3, stride 1, pad 1), 5 max pools, fc6/fc7 with 4096
/// units, fc8 and softmax. Input 3 x 16 x 112 x 112.
NetSpec build_c3d(std::size_t num_classes);

/// 34-layer residual network with (2+1)D blocks (3, 4, 6, 3) for clips of
/// `frames` frames at 112 x 112. `frames` must be divisible by 8.
NetSpec build_r2p1d_34(std::size_t num_classes, std::size_t frames);

/// Same topology with full 3D convolutions.
NetSpec build_r3d_34(std::size_t num_classes, std::size_t frames);

/// Two-stage (8 / 16 channel) (2+1)D residual network for desk-scale runs.
/// `frames` must be even.
NetSpec build_tiny_r2p1d(std::size_t num_classes, std::size_t frames = 8,
                         std::size_t size = 32);

/// Replaces every full 3D conv whose kernel extends over time and space with
/// a conv2p1d layer of the same geometry and name.
NetSpec factorize(const NetSpec& net);

/// Network by CLI name: c3d, r2p1d34, r3d34, tiny-r2p1d.
NetSpec build_by_name(const std::string& name, std::size_t num_classes, std::size_t frames,
                      std::size_t size);

}  // namespace stconv::net
