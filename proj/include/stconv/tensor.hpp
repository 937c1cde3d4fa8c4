#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "stconv/error.hpp"

namespace stconv {

class Rng;

using Shape = std::vector<std::size_t>;

std::size_t shape_product(const Shape& shape);
std::string shape_to_string(const Shape& shape);

/// Dense row-major array of 32-bit floats. Network activations use the
/// N x C x T x H x W order.
///
/// A default-constructed tensor is an empty placeholder (rank 0, no data);
/// every tensor produced by a public operation has rank >= 1 and extents >= 1.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<float> values);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  std::span<float> values() noexcept { return values_; }
  std::span<const float> values() const noexcept { return values_; }
  float* data() noexcept { return values_.data(); }
  const float* data() const noexcept { return values_.data(); }

  float& operator[](std::size_t i) noexcept { return values_[i]; }
  float operator[](std::size_t i) const noexcept { return values_[i]; }

  /// Same values under a new shape with the same element count.
  Tensor reshaped(Shape shape) const;

  bool all_finite() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<float> values_;
};

Tensor zeros(const Shape& shape);
Tensor full(const Shape& shape, float value);
Tensor fill_uniform(const Shape& shape, float lo, float hi, Rng& rng);

enum class ElementwiseOp { add, sub, mul };

Tensor elementwise(const Tensor& a, const Tensor& b, ElementwiseOp op);
inline Tensor add(const Tensor& a, const Tensor& b) { return elementwise(a, b, ElementwiseOp::add); }
inline Tensor sub(const Tensor& a, const Tensor& b) { return elementwise(a, b, ElementwiseOp::sub); }
inline Tensor mul(const Tensor& a, const Tensor& b) { return elementwise(a, b, ElementwiseOp::mul); }

/// Largest |a - b| / max(|b|, floor) over all elements.
double max_relative_error(const Tensor& a, const Tensor& b, double floor = 1e-6);
double max_abs_error(const Tensor& a, const Tensor& b);

}  // namespace stconv
