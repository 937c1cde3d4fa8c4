#pragma once

#include <cstddef>
#include <string>

#include "stconv/tensor.hpp"

namespace stconv::nn {

/// Extents along (time, height, width).
struct Triple {
  std::size_t t = 1;
  std::size_t h = 1;
  std::size_t w = 1;

  friend bool operator==(const Triple&, const Triple&) = default;
};

inline Triple cube(std::size_t n) { return {n, n, n}; }

std::string to_string(const Triple& triple);

/// floor((in + 2 * pad - kernel) / stride) + 1; throws a geometry error when
/// the window does not fit.
std::size_t output_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                          std::size_t pad);

Triple output_extents(const Triple& in, const Triple& kernel, const Triple& stride,
                      const Triple& pad);

/// Checks rank 5 and returns (T, H, W) of an N x C x T x H x W tensor shape.
Triple spatial_extents(const Shape& shape);

}  // namespace stconv::nn
