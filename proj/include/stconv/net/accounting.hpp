#pragma once

#include <cstddef>
#include <cstdint>

#include "stconv/net/spec.hpp"

namespace stconv::net {

/// Every trainable scalar: conv and fc weights and biases, batchnorm gamma and beta.
std::uint64_t count_params(const NetSpec& net);
std::uint64_t count_params(const LayerSpec& layer);

/// Conv weights only (no biases, no batchnorm).
std::uint64_t count_conv_weights(const LayerSpec& layer);

/// 2 x multiply-accumulates of every conv and fc layer for a batch.
std::uint64_t count_flops(const NetSpec& net, std::size_t batch = 1);

/// Layers of a kind. Non-recursive counts only top-level layers.
std::size_t count_layers(const NetSpec& net, LayerKind kind, bool recursive = false);

/// ReLUs (including the one after each residual addition).
std::size_t count_relus(const LayerSpec& layer);
/// ReLUs located before the first fc layer.
std::size_t count_conv_stage_relus(const NetSpec& net);

}  // namespace stconv::net
