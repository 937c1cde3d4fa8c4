#include "stconv/nn/conv3d.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace stconv::nn {

namespace {

// Column buffers are capped at this many floats per task.
constexpr std::size_t kColumnBudget = std::size_t{1} << 18;

struct Plan {
  std::size_t batch, in_ch, out_ch;
  Triple in, out, kernel, stride, pad;
  std::size_t patch;      // in_ch * kt * kh * kw
  std::size_t positions;  // To * Ho * Wo
  std::size_t chunk;      // output positions per column block
  std::size_t chunks;
};

Plan make_plan(const Shape& input, const Conv3dParams& params) {
  const auto& g = params.geometry;
  require(input.size() == 5, ErrorCode::shape_mismatch,
          "conv3d expects N x C x T x H x W input, got " + shape_to_string(input));
  require(input[1] == g.in_channels, ErrorCode::shape_mismatch,
          "conv3d input has " + std::to_string(input[1]) + " channels, layer expects " +
              std::to_string(g.in_channels));
  require(params.weights.shape() ==
              Shape{g.out_channels, g.in_channels, g.kernel.t, g.kernel.h, g.kernel.w},
          ErrorCode::shape_mismatch, "conv3d weight shape does not match geometry");
  require(!params.has_bias() || params.bias.shape() == Shape{g.out_channels},
          ErrorCode::shape_mismatch, "conv3d bias shape does not match geometry");
  Plan p;
  p.batch = input[0];
  p.in_ch = g.in_channels;
  p.out_ch = g.out_channels;
  p.in = {input[2], input[3], input[4]};
  p.kernel = g.kernel;
  p.stride = g.stride;
  p.pad = g.padding;
  p.out = output_extents(p.in, g.kernel, g.stride, g.padding);
  p.patch = p.in_ch * g.kernel.t * g.kernel.h * g.kernel.w;
  p.positions = p.out.t * p.out.h * p.out.w;
  p.chunk = std::clamp<std::size_t>(kColumnBudget / p.patch, 16, 4096);
  p.chunk = std::min(p.chunk, p.positions);
  p.chunks = (p.positions + p.chunk - 1) / p.chunk;
  return p;
}

// Signed input coordinate of the window origin for each position in a chunk.
struct Origins {
  std::vector<long> t, h, w;
};

Origins chunk_origins(const Plan& p, std::size_t begin, std::size_t count) {
  Origins o;
  o.t.resize(count);
  o.h.resize(count);
  o.w.resize(count);
  for (std::size_t j = 0; j < count; ++j) {
    const std::size_t pos = begin + j;
    const std::size_t ow = pos % p.out.w;
    const std::size_t oh = (pos / p.out.w) % p.out.h;
    const std::size_t ot = pos / (p.out.w * p.out.h);
    o.t[j] = static_cast<long>(ot * p.stride.t) - static_cast<long>(p.pad.t);
    o.h[j] = static_cast<long>(oh * p.stride.h) - static_cast<long>(p.pad.h);
    o.w[j] = static_cast<long>(ow * p.stride.w) - static_cast<long>(p.pad.w);
  }
  return o;
}

// col[k][j] for k = (ic, kt, kh, kw) over one chunk of output positions.
void im2col(const Plan& p, const float* x, const Origins& o, std::size_t count, float* col) {
  const long T = static_cast<long>(p.in.t), H = static_cast<long>(p.in.h),
             W = static_cast<long>(p.in.w);
  std::size_t k = 0;
  for (std::size_t ic = 0; ic < p.in_ch; ++ic) {
    const float* xc = x + ic * p.in.t * p.in.h * p.in.w;
    for (std::size_t kt = 0; kt < p.kernel.t; ++kt) {
      for (std::size_t kh = 0; kh < p.kernel.h; ++kh) {
        for (std::size_t kw = 0; kw < p.kernel.w; ++kw, ++k) {
          float* row = col + k * count;
          for (std::size_t j = 0; j < count; ++j) {
            const long t = o.t[j] + static_cast<long>(kt);
            const long h = o.h[j] + static_cast<long>(kh);
            const long w = o.w[j] + static_cast<long>(kw);
            row[j] = (t >= 0 && t < T && h >= 0 && h < H && w >= 0 && w < W)
                         ? xc[(t * H + h) * W + w]
                         : 0.0f;
          }
        }
      }
    }
  }
}

// Scatter-add of column gradients back into the input gradient.
void col2im(const Plan& p, const float* col, const Origins& o, std::size_t count, float* gx) {
  const long T = static_cast<long>(p.in.t), H = static_cast<long>(p.in.h),
             W = static_cast<long>(p.in.w);
  std::size_t k = 0;
  for (std::size_t ic = 0; ic < p.in_ch; ++ic) {
    float* gc = gx + ic * p.in.t * p.in.h * p.in.w;
    for (std::size_t kt = 0; kt < p.kernel.t; ++kt) {
      for (std::size_t kh = 0; kh < p.kernel.h; ++kh) {
        for (std::size_t kw = 0; kw < p.kernel.w; ++kw, ++k) {
          const float* row = col + k * count;
          for (std::size_t j = 0; j < count; ++j) {
            const long t = o.t[j] + static_cast<long>(kt);
            const long h = o.h[j] + static_cast<long>(kh);
            const long w = o.w[j] + static_cast<long>(kw);
            if (t >= 0 && t < T && h >= 0 && h < H && w >= 0 && w < W) {
              gc[(t * H + h) * W + w] += row[j];
            }
          }
        }
      }
    }
  }
}

float dot(const float* a, const float* b, std::size_t n) {
  float acc[8] = {};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t l = 0; l < 8; ++l) acc[l] += a[i + l] * b[i + l];
  }
  float tail = 0.0f;
  for (; i < n; ++i) tail += a[i] * b[i];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) +
         tail;
}

}  // namespace

Conv3dParams Conv3dParams::initialized(const Conv3dGeometry& geometry, bool with_bias, Rng& rng) {
  const auto& k = geometry.kernel;
  const std::size_t fan_in = geometry.in_channels * k.t * k.h * k.w;
  const float bound = static_cast<float>(std::sqrt(1.0 / static_cast<double>(fan_in)));
  Conv3dParams p;
  p.geometry = geometry;
  p.weights = fill_uniform({geometry.out_channels, geometry.in_channels, k.t, k.h, k.w}, -bound,
                           bound, rng);
  if (with_bias) p.bias = fill_uniform({geometry.out_channels}, -bound, bound, rng);
  return p;
}

Conv3dParams Conv3dParams::zero(const Conv3dGeometry& geometry, bool with_bias) {
  const auto& k = geometry.kernel;
  Conv3dParams p;
  p.geometry = geometry;
  p.weights = zeros({geometry.out_channels, geometry.in_channels, k.t, k.h, k.w});
  if (with_bias) p.bias = zeros({geometry.out_channels});
  return p;
}

Shape conv3d_output_shape(const Shape& input, const Conv3dGeometry& geometry) {
  require(input.size() == 5, ErrorCode::shape_mismatch,
          "conv3d expects N x C x T x H x W input, got " + shape_to_string(input));
  require(input[1] == geometry.in_channels, ErrorCode::shape_mismatch,
          "conv3d channel mismatch");
  const auto out = output_extents({input[2], input[3], input[4]}, geometry.kernel,
                                  geometry.stride, geometry.padding);
  return {input[0], geometry.out_channels, out.t, out.h, out.w};
}

Tensor conv3d_forward(const Tensor& input, const Conv3dParams& params,
                      const Executor& executor) {
  const Plan p = make_plan(input.shape(), params);
  Tensor output({p.batch, p.out_ch, p.out.t, p.out.h, p.out.w});
  const std::size_t in_stride = p.in_ch * p.in.t * p.in.h * p.in.w;
  const std::size_t out_stride = p.out_ch * p.positions;
  const float* weights = params.weights.data();

  executor.parallel_for(p.batch * p.chunks, [&](std::size_t task) {
    const std::size_t n = task / p.chunks;
    const std::size_t begin = (task % p.chunks) * p.chunk;
    const std::size_t count = std::min(p.chunk, p.positions - begin);
    const Origins origins = chunk_origins(p, begin, count);
    std::vector<float> col(p.patch * count);
    im2col(p, input.data() + n * in_stride, origins, count, col.data());

    std::vector<float> acc(count);
    for (std::size_t oc = 0; oc < p.out_ch; ++oc) {
      std::fill(acc.begin(), acc.end(), params.has_bias() ? params.bias[oc] : 0.0f);
      const float* wrow = weights + oc * p.patch;
      for (std::size_t k = 0; k < p.patch; ++k) {
        const float wk = wrow[k];
        if (wk == 0.0f) continue;
        const float* crow = col.data() + k * count;
        for (std::size_t j = 0; j < count; ++j) acc[j] += wk * crow[j];
      }
      std::copy(acc.begin(), acc.end(),
                output.data() + n * out_stride + oc * p.positions + begin);
    }
  });
  return output;
}

Tensor conv3d_forward_naive(const Tensor& input, const Conv3dParams& params) {
  const Plan p = make_plan(input.shape(), params);
  Tensor output({p.batch, p.out_ch, p.out.t, p.out.h, p.out.w});
  const auto& x = input;
  const auto& w = params.weights;
  const long T = static_cast<long>(p.in.t), H = static_cast<long>(p.in.h),
             W = static_cast<long>(p.in.w);
  std::size_t idx = 0;
  for (std::size_t n = 0; n < p.batch; ++n) {
    for (std::size_t oc = 0; oc < p.out_ch; ++oc) {
      for (std::size_t ot = 0; ot < p.out.t; ++ot) {
        for (std::size_t oh = 0; oh < p.out.h; ++oh) {
          for (std::size_t ow = 0; ow < p.out.w; ++ow, ++idx) {
            float sum = params.has_bias() ? params.bias[oc] : 0.0f;
            for (std::size_t ic = 0; ic < p.in_ch; ++ic) {
              for (std::size_t kt = 0; kt < p.kernel.t; ++kt) {
                const long t = static_cast<long>(ot * p.stride.t + kt) - static_cast<long>(p.pad.t);
                if (t < 0 || t >= T) continue;
                for (std::size_t kh = 0; kh < p.kernel.h; ++kh) {
                  const long h =
                      static_cast<long>(oh * p.stride.h + kh) - static_cast<long>(p.pad.h);
                  if (h < 0 || h >= H) continue;
                  for (std::size_t kw = 0; kw < p.kernel.w; ++kw) {
                    const long ww =
                        static_cast<long>(ow * p.stride.w + kw) - static_cast<long>(p.pad.w);
                    if (ww < 0 || ww >= W) continue;
                    const std::size_t xi =
                        (((n * p.in_ch + ic) * p.in.t + t) * p.in.h + h) * p.in.w + ww;
                    const std::size_t wi =
                        (((oc * p.in_ch + ic) * p.kernel.t + kt) * p.kernel.h + kh) *
                            p.kernel.w + kw;
                    sum += w[wi] * x[xi];
                  }
                }
              }
            }
            output[idx] = sum;
          }
        }
      }
    }
  }
  return output;
}

Conv3dGrads conv3d_backward(const Tensor& input, const Conv3dParams& params,
                            const Tensor& grad_out, const Executor& executor) {
  const Plan p = make_plan(input.shape(), params);
  require(grad_out.shape() == Shape{p.batch, p.out_ch, p.out.t, p.out.h, p.out.w},
          ErrorCode::shape_mismatch,
          "conv3d grad_out shape " + shape_to_string(grad_out.shape()) +
              " does not match forward output");
  const std::size_t in_stride = p.in_ch * p.in.t * p.in.h * p.in.w;
  const std::size_t out_stride = p.out_ch * p.positions;
  const std::size_t wsize = p.out_ch * p.patch;
  const float* weights = params.weights.data();

  Conv3dGrads grads;
  grads.input = Tensor(input.shape());
  // Per-item partial sums, reduced in item order afterwards.
  std::vector<float> partial_w(p.batch * wsize, 0.0f);
  std::vector<float> partial_b(p.batch * p.out_ch, 0.0f);

  executor.parallel_for(p.batch, [&](std::size_t n) {
    float* gx = grads.input.data() + n * in_stride;
    float* gw = partial_w.data() + n * wsize;
    float* gb = partial_b.data() + n * p.out_ch;
    const float* x = input.data() + n * in_stride;
    const float* go = grad_out.data() + n * out_stride;
    std::vector<float> col(p.patch * p.chunk);
    std::vector<float> gcol(p.patch * p.chunk);
    std::vector<float> g(p.out_ch * p.chunk);
    for (std::size_t c = 0; c < p.chunks; ++c) {
      const std::size_t begin = c * p.chunk;
      const std::size_t count = std::min(p.chunk, p.positions - begin);
      const Origins origins = chunk_origins(p, begin, count);
      im2col(p, x, origins, count, col.data());
      for (std::size_t oc = 0; oc < p.out_ch; ++oc) {
        std::copy_n(go + oc * p.positions + begin, count, g.data() + oc * count);
      }
      for (std::size_t oc = 0; oc < p.out_ch; ++oc) {
        const float* grow = g.data() + oc * count;
        float bsum = 0.0f;
        for (std::size_t j = 0; j < count; ++j) bsum += grow[j];
        gb[oc] += bsum;
        for (std::size_t k = 0; k < p.patch; ++k) {
          gw[oc * p.patch + k] += dot(grow, col.data() + k * count, count);
        }
      }
      std::fill(gcol.begin(), gcol.begin() + p.patch * count, 0.0f);
      for (std::size_t oc = 0; oc < p.out_ch; ++oc) {
        const float* grow = g.data() + oc * count;
        const float* wrow = weights + oc * p.patch;
        for (std::size_t k = 0; k < p.patch; ++k) {
          const float wk = wrow[k];
          if (wk == 0.0f) continue;
          float* gc = gcol.data() + k * count;
          for (std::size_t j = 0; j < count; ++j) gc[j] += wk * grow[j];
        }
      }
      col2im(p, gcol.data(), origins, count, gx);
    }
  });

  grads.weights = Tensor(params.weights.shape());
  for (std::size_t n = 0; n < p.batch; ++n) {
    const float* src = partial_w.data() + n * wsize;
    float* dst = grads.weights.data();
    for (std::size_t i = 0; i < wsize; ++i) dst[i] += src[i];
  }
  if (params.has_bias()) {
    grads.bias = Tensor({p.out_ch});
    for (std::size_t n = 0; n < p.batch; ++n) {
      for (std::size_t oc = 0; oc < p.out_ch; ++oc) {
        grads.bias[oc] += partial_b[n * p.out_ch + oc];
      }
    }
  }
  return grads;
}

Conv3dGrads conv3d_backward_naive(const Tensor& input, const Conv3dParams& params,
                                  const Tensor& grad_out) {
  const Plan p = make_plan(input.shape(), params);
  require(grad_out.shape() == Shape{p.batch, p.out_ch, p.out.t, p.out.h, p.out.w},
          ErrorCode::shape_mismatch, "conv3d grad_out shape does not match forward output");
  Conv3dGrads grads;
  grads.input = Tensor(input.shape());
  grads.weights = Tensor(params.weights.shape());
  if (params.has_bias()) grads.bias = Tensor({p.out_ch});
  const long T = static_cast<long>(p.in.t), H = static_cast<long>(p.in.h),
             W = static_cast<long>(p.in.w);
  std::size_t idx = 0;
  for (std::size_t n = 0; n < p.batch; ++n) {
    for (std::size_t oc = 0; oc < p.out_ch; ++oc) {
      for (std::size_t ot = 0; ot < p.out.t; ++ot) {
        for (std::size_t oh = 0; oh < p.out.h; ++oh) {
          for (std::size_t ow = 0; ow < p.out.w; ++ow, ++idx) {
            const float g = grad_out[idx];
            if (params.has_bias()) grads.bias[oc] += g;
            for (std::size_t ic = 0; ic < p.in_ch; ++ic) {
              for (std::size_t kt = 0; kt < p.kernel.t; ++kt) {
                const long t = static_cast<long>(ot * p.stride.t + kt) - static_cast<long>(p.pad.t);
                if (t < 0 || t >= T) continue;
                for (std::size_t kh = 0; kh < p.kernel.h; ++kh) {
                  const long h =
                      static_cast<long>(oh * p.stride.h + kh) - static_cast<long>(p.pad.h);
                  if (h < 0 || h >= H) continue;
                  for (std::size_t kw = 0; kw < p.kernel.w; ++kw) {
                    const long ww =
                        static_cast<long>(ow * p.stride.w + kw) - static_cast<long>(p.pad.w);
                    if (ww < 0 || ww >= W) continue;
                    const std::size_t xi =
                        (((n * p.in_ch + ic) * p.in.t + t) * p.in.h + h) * p.in.w + ww;
                    const std::size_t wi =
                        (((oc * p.in_ch + ic) * p.kernel.t + kt) * p.kernel.h + kh) *
                            p.kernel.w + kw;
                    grads.weights[wi] += g * input[xi];
                    grads.input[xi] += g * params.weights[wi];
                  }
                }
              }
            }
          }
        }
      }
    }
  }
  return grads;
}

}  // namespace stconv::nn
