#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "stconv/nn/geometry.hpp"
#include "stconv/tensor.hpp"

namespace stconv::net {

using nn::Triple;

enum class LayerKind {
  conv3d,
  conv2p1d,
  maxpool3d,
  batchnorm,
  relu,
  fc,
  softmax,
  residual_block,
  global_avg_pool,
};

std::string_view to_string(LayerKind kind) noexcept;

/// Declarative layer description. Composite kinds keep their parts in
/// `body`: a conv2p1d holds its factorized sequence, a residual_block its
/// main path (and `shortcut` its projection; empty means identity). A
/// residual block applies a ReLU after the addition.
///
/// Channel fields: conv / conv2p1d use in -> out channels, batchnorm uses
/// out_channels, fc uses in -> out features.
struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  std::string name;
  Triple kernel{1, 1, 1};
  Triple stride{1, 1, 1};
  Triple padding{0, 0, 0};
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t midplane = 0;
  bool bias = true;
  std::vector<LayerSpec> body;
  std::vector<LayerSpec> shortcut;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Per-sample input contract (C, T, H, W).
struct InputContract {
  std::size_t channels = 3;
  std::size_t frames = 16;
  std::size_t height = 112;
  std::size_t width = 112;

  Shape sample_shape() const { return {channels, frames, height, width}; }
  friend bool operator==(const InputContract&, const InputContract&) = default;
};

struct NetSpec {
  std::string name;
  InputContract input;
  std::size_t num_classes = 2;
  std::vector<LayerSpec> layers;

  friend bool operator==(const NetSpec&, const NetSpec&) = default;
};

LayerSpec conv3d_layer(std::string name, std::size_t in_channels, std::size_t out_channels,
                       Triple kernel, Triple stride, Triple padding, bool bias);
LayerSpec batchnorm_layer(std::string name, std::size_t channels);
LayerSpec relu_layer(std::string name);
LayerSpec maxpool_layer(std::string name, Triple kernel, Triple stride,
                        Triple padding = {0, 0, 0});
LayerSpec fc_layer(std::string name, std::size_t in_features, std::size_t out_features);
LayerSpec softmax_layer(std::string name);
LayerSpec global_avg_pool_layer(std::string name);

/// Per-sample output shape of one layer: {C, T, H, W} for volumes, {D} after
/// an fc layer. Throws geometry / shape-mismatch errors on invalid chains.
Shape layer_output_shape(const LayerSpec& layer, const Shape& input);

struct ShapeRow {
  const LayerSpec* layer;
  std::size_t depth;  // 0 for top-level layers
  Shape input;
  Shape output;
};

/// Shape inference over the whole network, composite parts included.
std::vector<ShapeRow> trace_shapes(const NetSpec& net);
Shape output_shape(const NetSpec& net);

/// Per-sample output shape of the named layer (searched recursively).
Shape shape_after(const NetSpec& net, std::string_view layer_name);

/// Text manifest, one layer per line:
///   name kind kernel stride padding channels output
std::string describe(const NetSpec& net);

}  // namespace stconv::net
