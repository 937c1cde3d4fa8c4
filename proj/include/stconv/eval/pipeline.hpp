#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "stconv/eval/cv.hpp"
#include "stconv/executor.hpp"
#include "stconv/features/descriptor.hpp"
#include "stconv/features/softmax_head.hpp"
#include "stconv/features/svm.hpp"
#include "stconv/net/spec.hpp"

namespace stconv::eval {

/// Desk-scale fine-tuning recipe for tiny-r2p1d on the direction data:
/// 8-frame clips overlapping by 4 at the native 32 x 32, no flips, lr 0.01
/// decayed 10x every 2 epochs, momentum 0.9, batch 4, 8 epochs, 4 clips per
/// video and epoch.
features::FinetuneConfig tiny_direction_recipe();

using FoldProgressFn =
    std::function<void(std::size_t fold, std::size_t epoch, std::size_t iteration, double loss)>;

struct SoftmaxCvSetup {
  net::NetSpec spec;
  features::FinetuneConfig finetune;
  std::uint64_t seed = 42;
  const Executor* executor = nullptr;
  FoldProgressFn progress;
};

/// Fold f builds a fresh network from Rng(seed).derive(f), fine-tunes it on
/// the training videos and predicts the test videos with the same stream.
/// `videos` must already be prepared for the sampler.
FoldPipeline softmax_pipeline(const std::vector<video::VideoSource>& videos,
                              SoftmaxCvSetup setup);

/// Linear SVM per fold on precomputed descriptors. Labels must be 0 / 1;
/// class 1 is the positive side.
FoldPipeline svm_pipeline(const std::vector<features::VideoDescriptor>& descriptors,
                          features::SvmConfig config, std::uint64_t seed);

}  // namespace stconv::eval
