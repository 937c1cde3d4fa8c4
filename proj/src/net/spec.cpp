#include "stconv/net/spec.hpp"

#include <cstdio>
#include <functional>
#include <sstream>

namespace stconv::net {

std::string_view to_string(LayerKind kind) noexcept {
  switch (kind) {
    case LayerKind::conv3d: return "conv3d";
    case LayerKind::conv2p1d: return "conv2p1d";
    case LayerKind::maxpool3d: return "maxpool3d";
    case LayerKind::batchnorm: return "batchnorm";
    case LayerKind::relu: return "relu";
    case LayerKind::fc: return "fc";
    case LayerKind::softmax: return "softmax";
    case LayerKind::residual_block: return "residual_block";
    case LayerKind::global_avg_pool: return "global_avg_pool";
  }
  return "unknown";
}

LayerSpec conv3d_layer(std::string name, std::size_t in_channels, std::size_t out_channels,
                       Triple kernel, Triple stride, Triple padding, bool bias) {
  LayerSpec l;
  l.kind = LayerKind::conv3d;
  l.name = std::move(name);
  l.in_channels = in_channels;
  l.out_channels = out_channels;
  l.kernel = kernel;
  l.stride = stride;
  l.padding = padding;
  l.bias = bias;
  return l;
}

LayerSpec batchnorm_layer(std::string name, std::size_t channels) {
  LayerSpec l;
  l.kind = LayerKind::batchnorm;
  l.name = std::move(name);
  l.in_channels = channels;
  l.out_channels = channels;
  return l;
}

LayerSpec relu_layer(std::string name) {
  LayerSpec l;
  l.kind = LayerKind::relu;
  l.name = std::move(name);
  return l;
}

LayerSpec maxpool_layer(std::string name, Triple kernel, Triple stride, Triple padding) {
  LayerSpec l;
  l.kind = LayerKind::maxpool3d;
  l.name = std::move(name);
  l.kernel = kernel;
  l.stride = stride;
  l.padding = padding;
  return l;
}

LayerSpec fc_layer(std::string name, std::size_t in_features, std::size_t out_features) {
  LayerSpec l;
  l.kind = LayerKind::fc;
  l.name = std::move(name);
  l.in_channels = in_features;
  l.out_channels = out_features;
  return l;
}

LayerSpec softmax_layer(std::string name) {
  LayerSpec l;
  l.kind = LayerKind::softmax;
  l.name = std::move(name);
  return l;
}

LayerSpec global_avg_pool_layer(std::string name) {
  LayerSpec l;
  l.kind = LayerKind::global_avg_pool;
  l.name = std::move(name);
  return l;
}

namespace {

void require_volume(const LayerSpec& layer, const Shape& input) {
  require(input.size() == 4, ErrorCode::shape_mismatch,
          layer.name + ": expects a C x T x H x W volume, got " + shape_to_string(input));
}

Triple volume_extents(const Shape& s) { return {s[1], s[2], s[3]}; }

Shape chain(const std::vector<LayerSpec>& layers, Shape shape) {
  for (const auto& l : layers) shape = layer_output_shape(l, shape);
  return shape;
}

}  // namespace

Shape layer_output_shape(const LayerSpec& layer, const Shape& input) {
  switch (layer.kind) {
    case LayerKind::conv3d: {
      require_volume(layer, input);
      require(input[0] == layer.in_channels, ErrorCode::shape_mismatch,
              layer.name + ": input has " + std::to_string(input[0]) + " channels, expects " +
                  std::to_string(layer.in_channels));
      const auto out =
          nn::output_extents(volume_extents(input), layer.kernel, layer.stride, layer.padding);
      return {layer.out_channels, out.t, out.h, out.w};
    }
    case LayerKind::conv2p1d: {
      require_volume(layer, input);
      require(input[0] == layer.in_channels, ErrorCode::shape_mismatch,
              layer.name + ": channel mismatch");
      return chain(layer.body, input);
    }
    case LayerKind::maxpool3d: {
      require_volume(layer, input);
      const auto out =
          nn::output_extents(volume_extents(input), layer.kernel, layer.stride, layer.padding);
      return {input[0], out.t, out.h, out.w};
    }
    case LayerKind::batchnorm:
      require(!input.empty() && input[0] == layer.out_channels, ErrorCode::shape_mismatch,
              layer.name + ": batchnorm channel mismatch");
      return input;
    case LayerKind::relu:
      return input;
    case LayerKind::softmax:
      require(input.size() == 1, ErrorCode::shape_mismatch,
              layer.name + ": softmax expects a flat feature vector");
      return input;
    case LayerKind::fc:
      require(shape_product(input) == layer.in_channels, ErrorCode::shape_mismatch,
              layer.name + ": fc expects " + std::to_string(layer.in_channels) +
                  " inputs, got " + shape_to_string(input));
      return {layer.out_channels};
    case LayerKind::residual_block: {
      require_volume(layer, input);
      const Shape main = chain(layer.body, input);
      const Shape side = layer.shortcut.empty() ? input : chain(layer.shortcut, input);
      require(main == side, ErrorCode::shape_mismatch,
              layer.name + ": residual paths disagree: " + shape_to_string(main) + " vs " +
                  shape_to_string(side));
      return main;
    }
    case LayerKind::global_avg_pool:
      require_volume(layer, input);
      return {input[0], 1, 1, 1};
  }
  fail(ErrorCode::invalid_config, "unknown layer kind");
}

std::vector<ShapeRow> trace_shapes(const NetSpec& net) {
  std::vector<ShapeRow> rows;
  std::function<Shape(const std::vector<LayerSpec>&, Shape, std::size_t)> walk =
      [&](const std::vector<LayerSpec>& layers, Shape shape, std::size_t depth) {
        for (const auto& l : layers) {
          const Shape out = layer_output_shape(l, shape);
          rows.push_back({&l, depth, shape, out});
          if (!l.body.empty()) walk(l.body, shape, depth + 1);
          if (!l.shortcut.empty()) walk(l.shortcut, shape, depth + 1);
          shape = out;
        }
        return shape;
      };
  walk(net.layers, net.input.sample_shape(), 0);
  return rows;
}

Shape output_shape(const NetSpec& net) {
  return chain(net.layers, net.input.sample_shape());
}

Shape shape_after(const NetSpec& net, std::string_view layer_name) {
  for (const auto& row : trace_shapes(net)) {
    if (row.layer->name == layer_name) return row.output;
  }
  fail(ErrorCode::invalid_config, "no layer named " + std::string(layer_name));
}

std::string describe(const NetSpec& net) {
  std::ostringstream out;
  out << "# net " << net.name << " input " << shape_to_string(net.input.sample_shape())
      << " classes " << net.num_classes << "\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-34s %-16s %-8s %-8s %-8s %-16s %s\n", "# name", "kind",
                "kernel", "stride", "padding", "channels", "output");
  out << line;
  for (const auto& row : trace_shapes(net)) {
    const LayerSpec& l = *row.layer;
    std::string kernel = "-", stride = "-", padding = "-", channels = "-";
    switch (l.kind) {
      case LayerKind::conv3d:
      case LayerKind::conv2p1d:
        kernel = nn::to_string(l.kernel);
        stride = nn::to_string(l.stride);
        padding = nn::to_string(l.padding);
        channels = std::to_string(l.in_channels) + "->" + std::to_string(l.out_channels);
        if (l.kind == LayerKind::conv2p1d) channels += "/m" + std::to_string(l.midplane);
        break;
      case LayerKind::maxpool3d:
        kernel = nn::to_string(l.kernel);
        stride = nn::to_string(l.stride);
        padding = nn::to_string(l.padding);
        break;
      case LayerKind::batchnorm:
        channels = std::to_string(l.out_channels);
        break;
      case LayerKind::fc:
      case LayerKind::residual_block:
        channels = std::to_string(l.in_channels) + "->" + std::to_string(l.out_channels);
        break;
      default:
        break;
    }
    const std::string name = std::string(2 * row.depth, ' ') + l.name;
    std::snprintf(line, sizeof line, "%-34s %-16s %-8s %-8s %-8s %-16s %s\n", name.c_str(),
                  std::string(to_string(l.kind)).c_str(), kernel.c_str(), stride.c_str(),
                  padding.c_str(), channels.c_str(), shape_to_string(row.output).c_str());
    out << line;
  }
  return out.str();
}

}  // namespace stconv::net
