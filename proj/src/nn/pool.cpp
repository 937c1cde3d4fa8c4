#include "stconv/nn/pool.hpp"

#include <limits>

namespace stconv::nn {

PoolResult maxpool3d_forward(const Tensor& input, const Triple& kernel, const Triple& stride,
                             const Triple& padding) {
  const Triple in = spatial_extents(input.shape());
  require(padding.t < kernel.t && padding.h < kernel.h && padding.w < kernel.w,
          ErrorCode::geometry, "pool padding must be smaller than the window");
  const Triple out = output_extents(in, kernel, stride, padding);
  const std::size_t batch = input.dim(0), channels = input.dim(1);
  PoolResult result;
  result.output = Tensor({batch, channels, out.t, out.h, out.w});
  result.argmax.resize(result.output.size());
  const long T = static_cast<long>(in.t), H = static_cast<long>(in.h),
             W = static_cast<long>(in.w);
  std::size_t idx = 0;
  for (std::size_t plane = 0; plane < batch * channels; ++plane) {
    const std::size_t base = plane * in.t * in.h * in.w;
    for (std::size_t ot = 0; ot < out.t; ++ot) {
      for (std::size_t oh = 0; oh < out.h; ++oh) {
        for (std::size_t ow = 0; ow < out.w; ++ow, ++idx) {
          float best = -std::numeric_limits<float>::infinity();
          std::size_t best_at = base;
          bool found = false;
          for (std::size_t kt = 0; kt < kernel.t; ++kt) {
            const long t = static_cast<long>(ot * stride.t + kt) - static_cast<long>(padding.t);
            if (t < 0 || t >= T) continue;
            for (std::size_t kh = 0; kh < kernel.h; ++kh) {
              const long h = static_cast<long>(oh * stride.h + kh) - static_cast<long>(padding.h);
              if (h < 0 || h >= H) continue;
              for (std::size_t kw = 0; kw < kernel.w; ++kw) {
                const long w =
                    static_cast<long>(ow * stride.w + kw) - static_cast<long>(padding.w);
                if (w < 0 || w >= W) continue;
                const std::size_t at = base + (static_cast<std::size_t>(t) * in.h +
                                               static_cast<std::size_t>(h)) * in.w +
                                       static_cast<std::size_t>(w);
                if (!found || input[at] > best) {
                  best = input[at];
                  best_at = at;
                  found = true;
                }
              }
            }
          }
          result.output[idx] = best;
          result.argmax[idx] = best_at;
        }
      }
    }
  }
  return result;
}

Tensor maxpool3d_backward(const Tensor& grad_out, const std::vector<std::uint64_t>& argmax,
                          const Shape& input_shape) {
  require(argmax.size() == grad_out.size(), ErrorCode::shape_mismatch,
          "maxpool grad_out does not match the recorded forward output");
  Tensor grad_in(input_shape);
  for (std::size_t i = 0; i < argmax.size(); ++i) {
    require(argmax[i] < grad_in.size(), ErrorCode::shape_mismatch, "maxpool argmax out of range");
    grad_in[argmax[i]] += grad_out[i];
  }
  return grad_in;
}

Tensor global_avg_pool_forward(const Tensor& input) {
  const Triple in = spatial_extents(input.shape());
  const std::size_t planes = input.dim(0) * input.dim(1);
  const std::size_t volume = in.t * in.h * in.w;
  Tensor out({input.dim(0), input.dim(1), 1, 1, 1});
  for (std::size_t p = 0; p < planes; ++p) {
    double sum = 0.0;
    const float* x = input.data() + p * volume;
    for (std::size_t i = 0; i < volume; ++i) sum += x[i];
    out[p] = static_cast<float>(sum / static_cast<double>(volume));
  }
  return out;
}

Tensor global_avg_pool_backward(const Tensor& grad_out, const Shape& input_shape) {
  const Triple in = spatial_extents(input_shape);
  require(grad_out.shape() == Shape{input_shape[0], input_shape[1], 1, 1, 1},
          ErrorCode::shape_mismatch, "global average pool grad_out shape mismatch");
  const std::size_t volume = in.t * in.h * in.w;
  Tensor grad_in(input_shape);
  const float scale = 1.0f / static_cast<float>(volume);
  for (std::size_t p = 0; p < grad_out.size(); ++p) {
    float* gx = grad_in.data() + p * volume;
    const float g = grad_out[p] * scale;
    for (std::size_t i = 0; i < volume; ++i) gx[i] = g;
  }
  return grad_in;
}

}  // namespace stconv::nn
