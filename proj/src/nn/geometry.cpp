#include "stconv/nn/geometry.hpp"

namespace stconv::nn {

std::string to_string(const Triple& triple) {
  return std::to_string(triple.t) + "x" + std::to_string(triple.h) + "x" +
         std::to_string(triple.w);
}

std::size_t output_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                          std::size_t pad) {
  require(kernel >= 1 && stride >= 1, ErrorCode::geometry, "kernel and stride must be >= 1");
  const std::size_t padded = in + 2 * pad;
  require(padded >= kernel, ErrorCode::geometry,
          "window " + std::to_string(kernel) + " does not fit extent " + std::to_string(in) +
              " with padding " + std::to_string(pad));
  return (padded - kernel) / stride + 1;
}

Triple output_extents(const Triple& in, const Triple& kernel, const Triple& stride,
                      const Triple& pad) {
  return {output_extent(in.t, kernel.t, stride.t, pad.t),
          output_extent(in.h, kernel.h, stride.h, pad.h),
          output_extent(in.w, kernel.w, stride.w, pad.w)};
}

Triple spatial_extents(const Shape& shape) {
  require(shape.size() == 5, ErrorCode::shape_mismatch,
          "expected N x C x T x H x W, got " + shape_to_string(shape));
  return {shape[2], shape[3], shape[4]};
}

}  // namespace stconv::nn
