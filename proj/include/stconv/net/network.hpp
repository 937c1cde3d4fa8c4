#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include "stconv/executor.hpp"
#include "stconv/io.hpp"
#include "stconv/net/spec.hpp"
#include "stconv/nn/layers.hpp"
#include "stconv/nn/sgd.hpp"
#include "stconv/rng.hpp"

namespace stconv::net {

namespace detail {
class Module;
}

/// Instantiated network: owns parameters, batchnorm running statistics and
/// the activations cached by the last train-mode forward pass.
///
/// Parameter and buffer names are the layer names from the NetSpec with a
/// suffix (.weight, .bias, .gamma, .beta, .running_mean, .running_var).
class Network {
 public:
  Network(NetSpec spec, Rng& rng);
  ~Network();
  Network(Network&&) noexcept;
  Network& operator=(Network&&) noexcept;

  const NetSpec& spec() const noexcept { return spec_; }

  void set_executor(const Executor* executor) noexcept { executor_ = executor; }
  const Executor& executor() const noexcept {
    return executor_ ? *executor_ : Executor::serial();
  }

  /// Full forward pass on N x C x T x H x W input; ends with softmax
  /// probabilities for classifier networks.
  Tensor forward(const Tensor& input, nn::Mode mode);

  /// Forward pass that stops before a trailing softmax layer.
  Tensor logits(const Tensor& input, nn::Mode mode);

  /// Output of the named top-level layer (inclusive).
  Tensor forward_to(const Tensor& input, std::string_view layer, nn::Mode mode);

  /// Backpropagates from the output of the last train-mode pass, accumulating
  /// parameter gradients. Returns the gradient w.r.t. the input.
  Tensor backward(const Tensor& grad_out);

  std::vector<nn::Parameter*> parameters();
  void zero_grad();

  /// Parameters followed by batchnorm buffers, in layer order.
  std::vector<NamedTensor> state() const;
  /// Replaces every entry of state(); names and shapes must match exactly.
  void load_state(const std::vector<NamedTensor>& entries);

 private:
  Tensor run(const Tensor& input, nn::Mode mode, std::size_t stop);

  NetSpec spec_;
  std::vector<std::unique_ptr<detail::Module>> layers_;
  std::size_t last_stop_ = 0;
  const Executor* executor_ = nullptr;
};

}  // namespace stconv::net
