#pragma once

#include <span>

#include "stconv/tensor.hpp"

namespace stconv::nn {

/// Mean negative log-likelihood of the true class over the rows of an
/// N x K probability tensor. Labels must lie in [0, K).
double cross_entropy_loss(const Tensor& probs, std::span<const int> labels);

/// d(cross_entropy(softmax(logits))) / d(logits) given the softmax output.
Tensor softmax_cross_entropy_grad(const Tensor& probs, std::span<const int> labels);

/// mean(max(0, 1 - y * score)) + (l2 / 2) * |weights|^2, labels in {-1, +1}.
double hinge_loss(std::span<const float> scores, std::span<const int> labels, double l2,
                  std::span<const float> weights);

}  // namespace stconv::nn
