#include "stconv/features/softmax_head.hpp"

#include <algorithm>
#include <numeric>

#include "stconv/nn/layers.hpp"
#include "stconv/nn/loss.hpp"

namespace stconv::features {

Tensor aggregate_softmax(const std::vector<Tensor>& clip_probs) {
  require(!clip_probs.empty(), ErrorCode::empty_input, "no clip probabilities to aggregate");
  const std::size_t K = clip_probs[0].size();
  std::vector<const Tensor*> order;
  for (const auto& p : clip_probs) {
    require(p.size() == K, ErrorCode::shape_mismatch, "clip probability vectors differ in length");
    order.push_back(&p);
  }
  std::sort(order.begin(), order.end(), [](const Tensor* a, const Tensor* b) {
    return std::lexicographical_compare(a->values().begin(), a->values().end(),
                                        b->values().begin(), b->values().end());
  });
  std::vector<double> sum(K, 0.0);
  for (const Tensor* p : order)
    for (std::size_t k = 0; k < K; ++k) sum[k] += (*p)[k];
  Tensor out({K});
  for (std::size_t k = 0; k < K; ++k) {
    out[k] = static_cast<float>(sum[k] / static_cast<double>(clip_probs.size()));
  }
  return out;
}

void FinetuneConfig::validate() const {
  sgd.validate();
  sampler.validate();
  require(epochs >= 1, ErrorCode::invalid_config, "epochs must be >= 1");
  require(clips_per_video >= 1, ErrorCode::invalid_config, "clips per video must be >= 1");
}

std::size_t clips_per_video(std::size_t epoch_size, std::size_t videos) {
  require(videos >= 1, ErrorCode::empty_input, "no training videos");
  return std::max<std::size_t>(1, epoch_size / videos);
}

std::size_t argmax(std::span<const float> values) {
  require(!values.empty(), ErrorCode::empty_input, "argmax of empty vector");
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

FinetuneResult finetune(net::Network& net, const std::vector<video::VideoSource>& videos,
                        const FinetuneConfig& config, Rng& rng, const ProgressFn& progress) {
  config.validate();
  require(!videos.empty(), ErrorCode::empty_input, "no training videos");
  const std::size_t K = net.spec().num_classes;
  for (const auto& v : videos) {
    require(v.label >= 0 && static_cast<std::size_t>(v.label) < K, ErrorCode::label,
            v.id + ": label " + std::to_string(v.label) + " outside [0, " + std::to_string(K) +
                ")");
  }
  FinetuneResult result;
  auto params = net.parameters();
  std::vector<std::size_t> schedule;
  for (std::size_t v = 0; v < videos.size(); ++v)
    for (std::size_t c = 0; c < config.clips_per_video; ++c) schedule.push_back(v);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(schedule.begin(), schedule.end(), rng);
    double epoch_sum = 0.0;
    std::size_t iterations = 0;
    for (std::size_t first = 0; first < schedule.size(); first += config.sgd.batch_size) {
      const std::size_t last = std::min(schedule.size(), first + config.sgd.batch_size);
      std::vector<video::Clip> clips;
      std::vector<int> labels;
      for (std::size_t i = first; i < last; ++i) {
        const auto& v = videos[schedule[i]];
        clips.push_back(video::train_clip(v, config.sampler, rng));
        if (config.shuffle_frames) video::shuffle_frames(clips.back(), rng);
        labels.push_back(v.label);
      }
      net.zero_grad();
      const Tensor probs = net.forward(video::stack_clips(clips), nn::Mode::train);
      const double loss = nn::cross_entropy_loss(probs, labels);
      net.backward(nn::softmax_cross_entropy_grad(probs, labels));
      nn::sgd_step(params, config.sgd, epoch);
      result.iteration_loss.push_back(loss);
      epoch_sum += loss;
      ++iterations;
      if (progress) progress(epoch, iterations - 1, loss);
    }
    result.epoch_loss.push_back(epoch_sum / static_cast<double>(iterations));
  }
  return result;
}

Tensor predict_video(net::Network& net, const video::VideoSource& prepared,
                     const video::SamplerConfig& sampler, bool shuffle_frames, Rng& rng) {
  std::vector<video::Clip> clips = video::eval_clips(prepared, sampler);
  if (shuffle_frames) {
    for (auto& c : clips) video::shuffle_frames(c, rng);
  }
  const Tensor probs = net.forward(video::stack_clips(clips), nn::Mode::infer);
  const std::size_t K = probs.dim(1);
  std::vector<Tensor> rows;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const auto first = probs.values().begin() + static_cast<std::ptrdiff_t>(i * K);
    rows.emplace_back(Shape{K}, std::vector<float>(first, first + static_cast<std::ptrdiff_t>(K)));
  }
  return aggregate_softmax(rows);
}

}  // namespace stconv::features
