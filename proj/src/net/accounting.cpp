#include "stconv/net/accounting.hpp"

namespace stconv::net {

namespace {

std::uint64_t sum_params(const std::vector<LayerSpec>& layers) {
  std::uint64_t total = 0;
  for (const auto& l : layers) total += count_params(l);
  return total;
}

}  // namespace

std::uint64_t count_params(const LayerSpec& layer) {
  switch (layer.kind) {
    case LayerKind::conv3d:
      return count_conv_weights(layer) + (layer.bias ? layer.out_channels : 0);
    case LayerKind::batchnorm:
      return 2 * layer.out_channels;
    case LayerKind::fc:
      return static_cast<std::uint64_t>(layer.in_channels) * layer.out_channels +
             layer.out_channels;
    case LayerKind::conv2p1d:
    case LayerKind::residual_block:
      return sum_params(layer.body) + sum_params(layer.shortcut);
    default:
      return 0;
  }
}

std::uint64_t count_params(const NetSpec& net) { return sum_params(net.layers); }

std::uint64_t count_conv_weights(const LayerSpec& layer) {
  if (layer.kind == LayerKind::conv3d) {
    return static_cast<std::uint64_t>(layer.out_channels) * layer.in_channels * layer.kernel.t *
           layer.kernel.h * layer.kernel.w;
  }
  std::uint64_t total = 0;
  for (const auto& l : layer.body) total += count_conv_weights(l);
  for (const auto& l : layer.shortcut) total += count_conv_weights(l);
  return total;
}

std::uint64_t count_flops(const NetSpec& net, std::size_t batch) {
  std::uint64_t total = 0;
  for (const auto& row : trace_shapes(net)) {
    const LayerSpec& l = *row.layer;
    if (l.kind == LayerKind::conv3d) {
      const std::uint64_t outputs = shape_product(row.output);
      total += 2 * outputs * l.in_channels * l.kernel.t * l.kernel.h * l.kernel.w;
    } else if (l.kind == LayerKind::fc) {
      total += 2 * static_cast<std::uint64_t>(l.in_channels) * l.out_channels;
    }
  }
  return total * batch;
}

namespace {

std::size_t count_kind(const std::vector<LayerSpec>& layers, LayerKind kind, bool recursive) {
  std::size_t n = 0;
  for (const auto& l : layers) {
    if (l.kind == kind) ++n;
    if (recursive) n += count_kind(l.body, kind, true) + count_kind(l.shortcut, kind, true);
  }
  return n;
}

}  // namespace

std::size_t count_layers(const NetSpec& net, LayerKind kind, bool recursive) {
  return count_kind(net.layers, kind, recursive);
}

std::size_t count_relus(const LayerSpec& layer) {
  std::size_t n = layer.kind == LayerKind::relu || layer.kind == LayerKind::residual_block;
  for (const auto& l : layer.body) n += count_relus(l);
  for (const auto& l : layer.shortcut) n += count_relus(l);
  return n;
}

std::size_t count_conv_stage_relus(const NetSpec& net) {
  std::size_t n = 0;
  for (const auto& l : net.layers) {
    if (l.kind == LayerKind::fc) break;
    n += count_relus(l);
  }
  return n;
}

}  // namespace stconv::net
