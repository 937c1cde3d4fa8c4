#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "stconv/rng.hpp"
#include "stconv/tensor.hpp"

namespace stconv::features {

struct LinearSvmModel {
  Tensor weights;  // [D]
  float bias = 0.f;
  double l2 = 1e-4;
  std::size_t epochs = 0;
};

struct SvmConfig {
  double l2 = 1e-4;
  std::size_t epochs = 200;
  double step0 = 0.01;  // initial step size
  void validate() const;
};

struct SvmTrainResult {
  LinearSvmModel model;
  /// Regularized hinge objective of the averaged model after each epoch.
  std::vector<double> epoch_objective;
};

/// Pegasos-style subgradient SGD: one shuffled example per step with step
/// min(step0 / (1 + l2 step0 t), 1 / (l2 (t + 1))), then projection onto the
/// ball of radius 1/sqrt(l2). The model is the running average of the
/// iterates. The bias is learned as the weight of a constant feature. Rows
/// of `x` are examples, labels are -1 / +1. Degenerate error when only one
/// class is present.
SvmTrainResult svm_train(const Tensor& x, std::span<const int> labels, const SvmConfig& config,
                         Rng& rng);

struct SvmPrediction {
  int label;  // +1 when score >= 0
  double score;
};
SvmPrediction svm_predict(const LinearSvmModel& model, std::span<const float> x);

/// Regularized hinge objective of a model on a data set.
double svm_objective(const LinearSvmModel& model, const Tensor& x, std::span<const int> labels);

/// STM1 container with "svm.weights" [D] and "svm.bias" [1].
void save_svm(const std::filesystem::path& path, const LinearSvmModel& model);
LinearSvmModel load_svm(const std::filesystem::path& path);

}  // namespace stconv::features
