#include "stconv/features/svm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stconv/io.hpp"

namespace stconv::features {

void SvmConfig::validate() const {
  require(l2 > 0.0 && std::isfinite(l2), ErrorCode::invalid_config, "svm l2 must be > 0");
  require(epochs >= 1, ErrorCode::invalid_config, "svm epochs must be >= 1");
  require(step0 > 0.0 && std::isfinite(step0), ErrorCode::invalid_config,
          "svm step size must be > 0");
}

namespace {

void check_labels(std::span<const int> labels, std::size_t n) {
  require(labels.size() == n, ErrorCode::shape_mismatch, "one label per example required");
  for (int y : labels) require(y == 1 || y == -1, ErrorCode::label, "svm labels must be -1 or +1");
}

}  // namespace

SvmTrainResult svm_train(const Tensor& x, std::span<const int> labels, const SvmConfig& config,
                         Rng& rng) {
  config.validate();
  require(x.rank() == 2, ErrorCode::invalid_shape, "svm input must be N x D");
  const std::size_t N = x.dim(0), D = x.dim(1);
  check_labels(labels, N);
  const bool pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool neg = std::find(labels.begin(), labels.end(), -1) != labels.end();
  require(pos && neg, ErrorCode::degenerate, "svm training needs both classes");

  // w[D] holds the bias weight of the constant feature
  std::vector<double> w(D + 1, 0.0), sum(D + 1, 0.0);
  const double lambda = config.l2;
  const double radius = 1.0 / std::sqrt(lambda);
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  SvmTrainResult result;
  auto& m = result.model;
  m.weights = Tensor({D});
  m.l2 = lambda;
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      const float* xi = x.data() + i * D;
      double score = w[D];
      for (std::size_t k = 0; k < D; ++k) score += w[k] * xi[k];
      const double td = static_cast<double>(t);
      const double eta = std::min(config.step0 / (1.0 + lambda * config.step0 * td),
                                  1.0 / (lambda * (td + 1.0)));
      ++t;
      const double shrink = 1.0 - eta * lambda;
      for (double& v : w) v *= shrink;
      if (labels[i] * score < 1.0) {
        const double step = eta * labels[i];
        for (std::size_t k = 0; k < D; ++k) w[k] += step * xi[k];
        w[D] += step;
      }
      double norm2 = 0.0;
      for (double v : w) norm2 += v * v;
      if (norm2 > radius * radius) {
        const double s = radius / std::sqrt(norm2);
        for (double& v : w) v *= s;
      }
      for (std::size_t k = 0; k <= D; ++k) sum[k] += w[k];
    }
    const double inv = 1.0 / static_cast<double>(t);
    for (std::size_t k = 0; k < D; ++k) m.weights[k] = static_cast<float>(sum[k] * inv);
    m.bias = static_cast<float>(sum[D] * inv);
    m.epochs = epoch + 1;
    result.epoch_objective.push_back(svm_objective(m, x, labels));
  }
  return result;
}

SvmPrediction svm_predict(const LinearSvmModel& model, std::span<const float> x) {
  require(x.size() == model.weights.size(), ErrorCode::shape_mismatch,
          "descriptor has " + std::to_string(x.size()) + " dims, model expects " +
              std::to_string(model.weights.size()));
  double score = model.bias;
  for (std::size_t k = 0; k < x.size(); ++k) score += static_cast<double>(model.weights[k]) * x[k];
  return {score >= 0.0 ? 1 : -1, score};
}

double svm_objective(const LinearSvmModel& model, const Tensor& x, std::span<const int> labels) {
  require(x.rank() == 2, ErrorCode::invalid_shape, "svm input must be N x D");
  const std::size_t N = x.dim(0), D = x.dim(1);
  check_labels(labels, N);
  double hinge = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double s = svm_predict(model, {x.data() + i * D, D}).score;
    hinge += std::max(0.0, 1.0 - labels[i] * s);
  }
  double norm2 = static_cast<double>(model.bias) * model.bias;
  for (float v : model.weights.values()) norm2 += static_cast<double>(v) * v;
  return hinge / static_cast<double>(N) + 0.5 * model.l2 * norm2;
}

void save_svm(const std::filesystem::path& path, const LinearSvmModel& model) {
  save_checkpoint(path, {{"svm.weights", model.weights}, {"svm.bias", Tensor({1}, {model.bias})}});
}

LinearSvmModel load_svm(const std::filesystem::path& path) {
  LinearSvmModel m;
  bool have_w = false, have_b = false;
  for (auto& e : load_checkpoint(path)) {
    if (e.name == "svm.weights") {
      require(e.tensor.rank() == 1, ErrorCode::format, "svm.weights must be rank 1");
      m.weights = std::move(e.tensor);
      have_w = true;
    } else if (e.name == "svm.bias") {
      require(e.tensor.size() == 1, ErrorCode::format, "svm.bias must hold one value");
      m.bias = e.tensor[0];
      have_b = true;
    }
  }
  require(have_w && have_b, ErrorCode::format, path.string() + " is not an svm model");
  return m;
}

}  // namespace stconv::features
