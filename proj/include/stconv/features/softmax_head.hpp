#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "stconv/net/network.hpp"
#include "stconv/nn/sgd.hpp"
#include "stconv/rng.hpp"
#include "stconv/tensor.hpp"
#include "stconv/video/frames.hpp"
#include "stconv/video/sampler.hpp"

namespace stconv::features {

/// Elementwise mean of clip probability vectors, summed in sorted order.
Tensor aggregate_softmax(const std::vector<Tensor>& clip_probs);

struct FinetuneConfig {
  nn::SgdConfig sgd{1e-4, 0.1, 2, 0.9, 4};  // decay interval in epochs
  std::size_t epochs = 8;
  /// Clips drawn per video and epoch; an epoch size of 2560 over 640
  /// videos gives 4.
  std::size_t clips_per_video = 4;
  video::SamplerConfig sampler;
  /// Control: permute the frames of every clip (training and evaluation).
  bool shuffle_frames = false;

  void validate() const;
};

/// epoch_size / videos, at least 1.
std::size_t clips_per_video(std::size_t epoch_size, std::size_t videos);

struct FinetuneResult {
  std::vector<double> iteration_loss;
  std::vector<double> epoch_loss;  // mean of the epoch's iteration losses
};

using ProgressFn = std::function<void(std::size_t epoch, std::size_t iteration, double loss)>;

/// Mini-batch SGD on cross-entropy over jittered, augmented clips. `videos`
/// must already be resized (video::prepare_video) and labeled in
/// [0, num_classes). The learning rate decays per epoch.
FinetuneResult finetune(net::Network& net, const std::vector<video::VideoSource>& videos,
                        const FinetuneConfig& config, Rng& rng,
                        const ProgressFn& progress = nullptr);

/// Video-level probabilities: eval-mode clips, softmax per clip, averaged.
Tensor predict_video(net::Network& net, const video::VideoSource& prepared,
                     const video::SamplerConfig& sampler, bool shuffle_frames, Rng& rng);

std::size_t argmax(std::span<const float> values);

}  // namespace stconv::features
