#include "stconv/eval/pipeline.hpp"

#include "stconv/error.hpp"
#include "stconv/net/network.hpp"

namespace stconv::eval {

features::FinetuneConfig tiny_direction_recipe() {
  features::FinetuneConfig cfg;
  cfg.sgd = {0.01, 0.1, 2, 0.9, 4};
  cfg.epochs = 8;
  cfg.clips_per_video = 4;
  cfg.sampler.clip_len = 8;
  cfg.sampler.overlap = 4;
  cfg.sampler.resize_h = cfg.sampler.resize_w = 32;
  cfg.sampler.crop_h = cfg.sampler.crop_w = 32;
  cfg.sampler.flip_probability = 0.0;
  return cfg;
}

FoldPipeline softmax_pipeline(const std::vector<video::VideoSource>& videos,
                              SoftmaxCvSetup setup) {
  setup.finetune.validate();
  return [&videos, setup](const Fold& fold, std::size_t index) {
    Rng rng = Rng(setup.seed).derive(index);
    net::Network net(setup.spec, rng);
    if (setup.executor) net.set_executor(setup.executor);
    std::vector<video::VideoSource> train;
    for (auto i : fold.train) train.push_back(videos.at(i));
    features::ProgressFn progress;
    if (setup.progress) {
      progress = [&](std::size_t e, std::size_t it, double loss) { setup.progress(index, e, it, loss); };
    }
    features::finetune(net, train, setup.finetune, rng, progress);
    std::vector<Prediction> out;
    for (auto i : fold.test) {
      const auto& v = videos.at(i);
      const Tensor p = features::predict_video(net, v, setup.finetune.sampler,
                                               setup.finetune.shuffle_frames, rng);
      out.push_back({v.id, v.label, static_cast<int>(features::argmax(p.values()))});
    }
    return out;
  };
}

FoldPipeline svm_pipeline(const std::vector<features::VideoDescriptor>& descriptors,
                          features::SvmConfig config, std::uint64_t seed) {
  for (const auto& d : descriptors) {
    require(d.label == 0 || d.label == 1, ErrorCode::label,
            "svm head needs labels 0 / 1, got " + std::to_string(d.label) + " for " + d.video_id);
  }
  return [&descriptors, config, seed](const Fold& fold, std::size_t index) {
    std::vector<features::VideoDescriptor> train;
    std::vector<int> y;
    for (auto i : fold.train) {
      train.push_back(descriptors.at(i));
      y.push_back(descriptors[i].label == 1 ? 1 : -1);
    }
    Rng rng = Rng(seed).derive(index);
    const auto model = features::svm_train(features::descriptor_matrix(train), y, config, rng).model;
    std::vector<Prediction> out;
    for (auto i : fold.test) {
      const auto& d = descriptors.at(i);
      const int predicted = features::svm_predict(model, d.vector.values()).label > 0 ? 1 : 0;
      out.push_back({d.video_id, d.label, predicted});
    }
    return out;
  };
}

}  // namespace stconv::eval
