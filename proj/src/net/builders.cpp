#include "stconv/net/builders.hpp"

namespace stconv::net {

std::size_t midplane_channels(std::size_t t, std::size_t d, std::size_t n_in, std::size_t n_out) {
  require(t >= 1 && d >= 1 && n_in >= 1 && n_out >= 1, ErrorCode::invalid_config,
          "midplane arguments must be >= 1");
  return (t * d * d * n_in * n_out) / (d * d * n_in + t * n_out);
}

std::size_t factorized_weight_count(std::size_t t, std::size_t d, std::size_t n_in,
                                    std::size_t n_out) {
  const std::size_t m = midplane_channels(t, d, n_in, n_out);
  return d * d * n_in * m + t * m * n_out;
}

std::vector<LayerSpec> build_2p1d_block(const std::string& name, std::size_t t, std::size_t d,
                                        std::size_t n_in, std::size_t n_out, Triple stride) {
  const std::size_t m = midplane_channels(t, d, n_in, n_out);
  require(m >= 1, ErrorCode::geometry,
          name + ": parameter budget leaves no midplane channels");
  return {
      conv3d_layer(name + ".spatial", n_in, m, {1, d, d}, {1, stride.h, stride.w},
                   {0, d / 2, d / 2}, false),
      batchnorm_layer(name + ".spatial_bn", m),
      relu_layer(name + ".spatial_relu"),
      conv3d_layer(name + ".temporal", m, n_out, {t, 1, 1}, {stride.t, 1, 1}, {t / 2, 0, 0},
                   false),
  };
}

LayerSpec conv2p1d_layer(const std::string& name, std::size_t t, std::size_t d,
                         std::size_t n_in, std::size_t n_out, Triple stride) {
  LayerSpec l;
  l.kind = LayerKind::conv2p1d;
  l.name = name;
  l.kernel = {t, d, d};
  l.stride = stride;
  l.padding = {t / 2, d / 2, d / 2};
  l.in_channels = n_in;
  l.out_channels = n_out;
  l.midplane = midplane_channels(t, d, n_in, n_out);
  l.bias = false;
  l.body = build_2p1d_block(name, t, d, n_in, n_out, stride);
  return l;
}

namespace {

LayerSpec conv_unit(const std::string& name, std::size_t t, std::size_t d, std::size_t n_in,
                    std::size_t n_out, Triple stride, bool factorized) {
  if (factorized) return conv2p1d_layer(name, t, d, n_in, n_out, stride);
  return conv3d_layer(name, n_in, n_out, {t, d, d}, stride, {t / 2, d / 2, d / 2}, false);
}

}  // namespace

LayerSpec residual_block(const std::string& name, std::size_t n_in, std::size_t n_out,
                         std::size_t stride, bool factorized) {
  LayerSpec l;
  l.kind = LayerKind::residual_block;
  l.name = name;
  l.in_channels = n_in;
  l.out_channels = n_out;
  l.stride = {stride, stride, stride};
  l.bias = false;
  l.body = {
      conv_unit(name + ".conv_a", 3, 3, n_in, n_out, {stride, stride, stride}, factorized),
      batchnorm_layer(name + ".bn_a", n_out),
      relu_layer(name + ".relu_a"),
      conv_unit(name + ".conv_b", 3, 3, n_out, n_out, {1, 1, 1}, factorized),
      batchnorm_layer(name + ".bn_b", n_out),
  };
  if (stride != 1 || n_in != n_out) {
    l.shortcut = {
        conv3d_layer(name + ".proj", n_in, n_out, {1, 1, 1}, {stride, stride, stride},
                     {0, 0, 0}, false),
        batchnorm_layer(name + ".proj_bn", n_out),
    };
  }
  return l;
}

NetSpec build_c3d(std::size_t num_classes) {
  require(num_classes >= 2, ErrorCode::invalid_config, "C3D needs at least 2 classes");
  NetSpec net;
  net.name = "c3d";
  net.input = {3, 16, 112, 112};
  net.num_classes = num_classes;
  auto& L = net.layers;
  const Triple k3 = nn::cube(3), s1 = nn::cube(1), p1 = nn::cube(1);
  auto conv = [&](const std::string& n, std::size_t in, std::size_t out) {
    L.push_back(conv3d_layer(n, in, out, k3, s1, p1, true));
    L.push_back(relu_layer("relu" + n.substr(4)));
  };
  const Triple pool = nn::cube(2);
  conv("conv1a", 3, 64);
  L.push_back(maxpool_layer("pool1", {1, 2, 2}, {1, 2, 2}));
  conv("conv2a", 64, 128);
  L.push_back(maxpool_layer("pool2", pool, pool));
  conv("conv3a", 128, 256);
  conv("conv3b", 256, 256);
  L.push_back(maxpool_layer("pool3", pool, pool));
  conv("conv4a", 256, 512);
  conv("conv4b", 512, 512);
  L.push_back(maxpool_layer("pool4", pool, pool));
  conv("conv5a", 512, 512);
  conv("conv5b", 512, 512);
  // spatial padding takes 7 x 7 to 4 x 4, giving 512 x 1 x 4 x 4 = 8192 features
  L.push_back(maxpool_layer("pool5", pool, pool, {0, 1, 1}));
  L.push_back(fc_layer("fc6", 8192, 4096));
  L.push_back(relu_layer("relu6"));
  L.push_back(fc_layer("fc7", 4096, 4096));
  L.push_back(relu_layer("relu7"));
  L.push_back(fc_layer("fc8", 4096, num_classes));
  L.push_back(softmax_layer("prob"));
  return net;
}

namespace {

NetSpec build_resnet34(std::size_t num_classes, std::size_t frames, bool factorized) {
  require(num_classes >= 2, ErrorCode::invalid_config, "need at least 2 classes");
  require(frames >= 8 && frames % 8 == 0, ErrorCode::geometry,
          "clip length must be a positive multiple of 8, got " + std::to_string(frames));
  NetSpec net;
  net.name = factorized ? "r2p1d34" : "r3d34";
  net.input = {3, frames, 112, 112};
  net.num_classes = num_classes;
  auto& L = net.layers;
  L.push_back(conv_unit("conv1", 3, 7, 3, 64, {1, 2, 2}, factorized));
  L.push_back(batchnorm_layer("bn1", 64));
  L.push_back(relu_layer("relu1"));
  struct Stage {
    std::size_t index, blocks, width;
  };
  const Stage stages[] = {{2, 3, 64}, {3, 4, 128}, {4, 6, 256}, {5, 3, 512}};
  std::size_t width = 64;
  for (const auto& s : stages) {
    for (std::size_t b = 0; b < s.blocks; ++b) {
      const std::size_t stride = (b == 0 && s.index > 2) ? 2 : 1;
      L.push_back(residual_block("conv" + std::to_string(s.index) + "_" + std::to_string(b + 1),
                                 width, s.width, stride, factorized));
      width = s.width;
    }
  }
  L.push_back(global_avg_pool_layer("pool"));
  L.push_back(fc_layer("fc", 512, num_classes));
  L.push_back(softmax_layer("prob"));
  return net;
}

}  // namespace

NetSpec build_r2p1d_34(std::size_t num_classes, std::size_t frames) {
  return build_resnet34(num_classes, frames, true);
}

NetSpec build_r3d_34(std::size_t num_classes, std::size_t frames) {
  return build_resnet34(num_classes, frames, false);
}

NetSpec build_tiny_r2p1d(std::size_t num_classes, std::size_t frames, std::size_t size) {
  require(num_classes >= 2, ErrorCode::invalid_config, "need at least 2 classes");
  require(frames >= 2 && frames % 2 == 0, ErrorCode::geometry, "clip length must be even");
  require(size >= 8 && size % 4 == 0, ErrorCode::geometry,
          "frame size must be a multiple of 4 and >= 8");
  NetSpec net;
  net.name = "tiny-r2p1d";
  net.input = {3, frames, size, size};
  net.num_classes = num_classes;
  auto& L = net.layers;
  L.push_back(conv2p1d_layer("conv1", 3, 7, 3, 8, {1, 2, 2}));
  L.push_back(batchnorm_layer("bn1", 8));
  L.push_back(relu_layer("relu1"));
  L.push_back(residual_block("conv2_1", 8, 8, 1, true));
  L.push_back(residual_block("conv3_1", 8, 16, 2, true));
  L.push_back(global_avg_pool_layer("pool"));
  L.push_back(fc_layer("fc", 16, num_classes));
  L.push_back(softmax_layer("prob"));
  return net;
}

namespace {

void factorize_layers(std::vector<LayerSpec>& layers) {
  for (auto& l : layers) {
    if (l.kind == LayerKind::conv3d && l.kernel.t > 1 && l.kernel.h > 1 &&
        l.kernel.h == l.kernel.w) {
      l = conv2p1d_layer(l.name, l.kernel.t, l.kernel.h, l.in_channels, l.out_channels, l.stride);
      continue;
    }
    if (l.kind == LayerKind::residual_block) {
      factorize_layers(l.body);
      factorize_layers(l.shortcut);
    }
  }
}

}  // namespace

NetSpec factorize(const NetSpec& net) {
  NetSpec out = net;
  factorize_layers(out.layers);
  if (out.name == "r3d34") out.name = "r2p1d34";
  return out;
}

NetSpec build_by_name(const std::string& name, std::size_t num_classes, std::size_t frames,
                      std::size_t size) {
  if (name == "c3d") return build_c3d(num_classes);
  if (name == "r2p1d34") return build_r2p1d_34(num_classes, frames);
  if (name == "r3d34") return build_r3d_34(num_classes, frames);
  if (name == "tiny-r2p1d") return build_tiny_r2p1d(num_classes, frames, size);
  fail(ErrorCode::invalid_config, "unknown network '" + name + "'");
}

}  // namespace stconv::net
