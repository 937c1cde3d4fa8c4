#include "stconv/nn/loss.hpp"

#include <algorithm>
#include <cmath>

namespace stconv::nn {

namespace {

void check_labels(const Tensor& probs, std::span<const int> labels) {
  require(probs.rank() == 2, ErrorCode::shape_mismatch, "expected N x K probabilities");
  require(labels.size() == probs.dim(0), ErrorCode::shape_mismatch,
          "label count does not match batch size");
  for (int y : labels) {
    require(y >= 0 && static_cast<std::size_t>(y) < probs.dim(1), ErrorCode::label,
            "label " + std::to_string(y) + " outside [0, " + std::to_string(probs.dim(1)) + ")");
  }
}

}  // namespace

double cross_entropy_loss(const Tensor& probs, std::span<const int> labels) {
  check_labels(probs, labels);
  const std::size_t k = probs.dim(1);
  double total = 0.0;
  for (std::size_t n = 0; n < labels.size(); ++n) {
    const double p = std::max(static_cast<double>(probs[n * k + labels[n]]), 1e-30);
    total -= std::log(p);
  }
  return std::max(0.0, total / static_cast<double>(labels.size()));
}

Tensor softmax_cross_entropy_grad(const Tensor& probs, std::span<const int> labels) {
  check_labels(probs, labels);
  const std::size_t k = probs.dim(1);
  const float scale = 1.0f / static_cast<float>(labels.size());
  Tensor grad(probs.shape());
  for (std::size_t n = 0; n < labels.size(); ++n) {
    for (std::size_t i = 0; i < k; ++i) {
      const float target = static_cast<std::size_t>(labels[n]) == i ? 1.0f : 0.0f;
      grad[n * k + i] = (probs[n * k + i] - target) * scale;
    }
  }
  return grad;
}

double hinge_loss(std::span<const float> scores, std::span<const int> labels, double l2,
                  std::span<const float> weights) {
  require(scores.size() == labels.size(), ErrorCode::shape_mismatch,
          "hinge loss needs one label per score");
  require(!scores.empty(), ErrorCode::empty_input, "hinge loss of an empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    require(labels[i] == 1 || labels[i] == -1, ErrorCode::label, "hinge labels must be -1 or +1");
    total += std::max(0.0, 1.0 - labels[i] * static_cast<double>(scores[i]));
  }
  double norm2 = 0.0;
  for (float w : weights) norm2 += static_cast<double>(w) * w;
  return total / static_cast<double>(scores.size()) + 0.5 * l2 * norm2;
}

}  // namespace stconv::nn
