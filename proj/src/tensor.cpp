#include "stconv/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stconv/rng.hpp"

namespace stconv {

std::size_t shape_product(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream out;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  return out.str();
}

namespace {

void validate_shape(const Shape& shape) {
  require(!shape.empty(), ErrorCode::invalid_shape, "tensor shape must have rank >= 1");
  for (auto e : shape) {
    require(e >= 1, ErrorCode::invalid_shape,
            "tensor extents must be >= 1, got " + shape_to_string(shape));
  }
}

}  // namespace

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  validate_shape(shape_);
  values_.assign(shape_product(shape_), 0.0f);
}

Tensor::Tensor(Shape shape, std::vector<float> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  validate_shape(shape_);
  require(values_.size() == shape_product(shape_), ErrorCode::invalid_shape,
          "value count " + std::to_string(values_.size()) + " does not match shape " +
              shape_to_string(shape_));
}

Tensor Tensor::reshaped(Shape shape) const {
  return Tensor(std::move(shape), values_);
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](float v) { return std::isfinite(v); });
}

Tensor zeros(const Shape& shape) { return Tensor(shape); }

Tensor full(const Shape& shape, float value) {
  Tensor t(shape);
  std::fill(t.values().begin(), t.values().end(), value);
  return t;
}

Tensor fill_uniform(const Shape& shape, float lo, float hi, Rng& rng) {
  require(lo < hi, ErrorCode::invalid_range, "fill_uniform requires lo < hi");
  Tensor t(shape);
  const float span = hi - lo;
  for (auto& v : t.values()) {
    v = lo + span * rng.next_float();
    // rounding can land exactly on hi when span is large relative to lo
    if (v >= hi) v = std::nextafter(hi, lo);
  }
  return t;
}

Tensor elementwise(const Tensor& a, const Tensor& b, ElementwiseOp op) {
  require(a.shape() == b.shape(), ErrorCode::shape_mismatch,
          "elementwise shapes differ: " + shape_to_string(a.shape()) + " vs " +
              shape_to_string(b.shape()));
  Tensor out(a.shape());
  auto x = a.values();
  auto y = b.values();
  auto z = out.values();
  switch (op) {
    case ElementwiseOp::add:
      for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] + y[i];
      break;
    case ElementwiseOp::sub:
      for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] - y[i];
      break;
    case ElementwiseOp::mul:
      for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] * y[i];
      break;
  }
  return out;
}

double max_relative_error(const Tensor& a, const Tensor& b, double floor) {
  require(a.shape() == b.shape(), ErrorCode::shape_mismatch, "max_relative_error shapes differ");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = std::abs(static_cast<double>(a[i]) - b[i]);
    const double scale = std::max(std::abs(static_cast<double>(b[i])), floor);
    worst = std::max(worst, diff / scale);
  }
  return worst;
}

double max_abs_error(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), ErrorCode::shape_mismatch, "max_abs_error shapes differ");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(static_cast<double>(a[i]) - b[i]));
  }
  return worst;
}

}  // namespace stconv
