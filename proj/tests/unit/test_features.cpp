#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "stconv/error.hpp"
#include "stconv/eval/synthetic.hpp"
#include "stconv/features/descriptor.hpp"
#include "stconv/features/softmax_head.hpp"
#include "stconv/features/svm.hpp"
#include "stconv/net/builders.hpp"

using namespace stconv;
using namespace stconv::features;
namespace fs = std::filesystem;

namespace {

double norm(const Tensor& t) {
  double s = 0;
  for (float v : t.values()) s += double(v) * v;
  return std::sqrt(s);
}

Tensor vec(std::initializer_list<float> v) { return Tensor({v.size()}, std::vector<float>(v)); }

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::io;
}

// Independent check that a labeled set is linearly separable (with bias).
bool perceptron_separates(const Tensor& x, const std::vector<int>& y) {
  const std::size_t N = x.dim(0), D = x.dim(1);
  std::vector<double> w(D + 1, 0.0);
  for (int epoch = 0; epoch < 1000; ++epoch) {
    bool clean = true;
    for (std::size_t i = 0; i < N; ++i) {
      double s = w[D];
      for (std::size_t k = 0; k < D; ++k) s += w[k] * x[i * D + k];
      if (y[i] * s <= 0) {
        clean = false;
        for (std::size_t k = 0; k < D; ++k) w[k] += y[i] * x[i * D + k];
        w[D] += y[i];
      }
    }
    if (clean) return true;
  }
  return false;
}

}  // namespace

TEST(Fc6, LengthDeterminismAndZeroNetwork) {
  Rng rng(1);
  net::Network c3d(net::build_c3d(2), rng);
  const video::Clip clip{"a", 0, fill_uniform({3, 16, 112, 112}, 0, 1, rng)};
  const auto feats = extract_fc6(c3d, {clip, clip});
  ASSERT_EQ(feats.size(), 2u);
  EXPECT_EQ(feats[0].shape(), (Shape{4096}));
  EXPECT_EQ(feats[0], feats[1]);
  EXPECT_TRUE(feats[0].all_finite());

  auto state = c3d.state();
  for (auto& e : state) {
    if (e.name.ends_with(".weight") || e.name.ends_with(".bias")) e.tensor = zeros(e.tensor.shape());
  }
  c3d.load_state(state);
  const auto zero = extract_fc6(c3d, {clip});
  for (float v : zero[0].values()) EXPECT_EQ(v, 0.f);
}

TEST(Fc6, WrongClipGeometryIsShapeError) {
  Rng rng(2);
  net::Network c3d(net::build_c3d(2), rng);
  const video::Clip clip{"a", 0, zeros({3, 8, 112, 112})};
  EXPECT_EQ(code_of([&] { extract_fc6(c3d, {clip}); }), ErrorCode::shape_mismatch);
  net::Network tiny(net::build_tiny_r2p1d(2), rng);
  EXPECT_EQ(code_of([&] { extract_fc6(tiny, {}); }), ErrorCode::invalid_config);
}

TEST(Descriptor, Cases) {
  std::vector<float> v(4096, 0.f);
  v[0] = 3;
  v[1] = 4;
  const Tensor d = aggregate_descriptor({Tensor({4096}, v)});
  EXPECT_FLOAT_EQ(d[0], 0.6f);
  EXPECT_FLOAT_EQ(d[1], 0.8f);
  for (std::size_t i = 2; i < 4096; ++i) EXPECT_EQ(d[i], 0.f);

  Rng rng(3);
  const Tensor x = fill_uniform({4096}, -1, 1, rng);
  const Tensor k = aggregate_descriptor({x, x, x, x, x});
  const Tensor one = aggregate_descriptor({x});
  EXPECT_LE(max_abs_error(k, one), 1e-7);

  Tensor neg = x;
  for (auto& e : neg.values()) e = -e;
  EXPECT_EQ(code_of([&] { aggregate_descriptor({x, neg}); }), ErrorCode::degenerate);
  EXPECT_EQ(code_of([&] { aggregate_descriptor({}); }), ErrorCode::empty_input);
}

TEST(Descriptor, UnitNormAndPermutationInvariance) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Tensor> clips;
    const std::size_t n = 1 + rng.uniform_index(12);
    for (std::size_t i = 0; i < n; ++i) clips.push_back(fill_uniform({4096}, -3, 5, rng));
    const Tensor d = aggregate_descriptor(clips);
    EXPECT_NEAR(norm(d), 1.0, 1e-6);
    for (int s = 0; s < 3; ++s) {
      shuffle(clips.begin(), clips.end(), rng);
      EXPECT_EQ(aggregate_descriptor(clips), d);
    }
  }
}

TEST(SoftmaxAggregate, CasesSimplexAndPermutation) {
  const Tensor m = aggregate_softmax({vec({0.8f, 0.2f}), vec({0.6f, 0.4f})});
  EXPECT_NEAR(m[0], 0.7f, 1e-7);
  EXPECT_NEAR(m[1], 0.3f, 1e-7);
  EXPECT_EQ(aggregate_softmax({vec({0.25f, 0.75f})}), vec({0.25f, 0.75f}));
  const Tensor u = aggregate_softmax({vec({0.5f, 0.5f}), vec({0.5f, 0.5f}), vec({0.5f, 0.5f})});
  EXPECT_EQ(u, vec({0.5f, 0.5f}));
  EXPECT_EQ(code_of([] { aggregate_softmax({}); }), ErrorCode::empty_input);

  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Tensor> rows;
    for (std::size_t i = 0; i < 1 + rng.uniform_index(9); ++i) {
      Tensor p = fill_uniform({5}, 0.01f, 1, rng);
      double s = 0;
      for (float v : p.values()) s += v;
      for (auto& v : p.values()) v = static_cast<float>(v / s);
      rows.push_back(p);
    }
    const Tensor a = aggregate_softmax(rows);
    double s = 0;
    for (float v : a.values()) {
      EXPECT_GE(v, 0.f);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-6);
    shuffle(rows.begin(), rows.end(), rng);
    EXPECT_EQ(aggregate_softmax(rows), a);
  }
}

TEST(Svm, SeparableToySet) {
  // two clusters in the plane with a gap of at least 0.5 along the first axis
  Rng rng(6);
  const std::size_t N = 40;
  Tensor x({N, 2});
  std::vector<int> y(N);
  for (std::size_t i = 0; i < N; ++i) {
    y[i] = i % 2 ? 1 : -1;
    x[2 * i] = static_cast<float>(y[i] * (0.25 + 0.5 * rng.next_double()));
    x[2 * i + 1] = static_cast<float>(2.0 * rng.next_double() - 1.0);
  }
  ASSERT_TRUE(perceptron_separates(x, y));
  Rng train(7);
  const auto r = svm_train(x, y, {1e-4, 100, 0.01}, train);
  for (std::size_t i = 0; i < N; ++i) EXPECT_EQ(svm_predict(r.model, {x.data() + 2 * i, 2}).label, y[i]);
}

TEST(Svm, SymmetricPair) {
  Tensor x({2, 3}, {1, 0, 0, -1, 0, 0});
  const std::vector<int> y{1, -1};
  Rng rng(8);
  const auto m = svm_train(x, y, {}, rng).model;
  EXPECT_GT(m.weights[0], 0.f);
  EXPECT_EQ(svm_predict(m, {x.data(), 3}).label, 1);
  EXPECT_EQ(svm_predict(m, {x.data() + 3, 3}).label, -1);
}

TEST(Svm, RegularizationDominance) {
  Rng rng(9);
  Tensor x = fill_uniform({30, 8}, -1, 1, rng);
  std::vector<int> y(30);
  for (std::size_t i = 0; i < 30; ++i) y[i] = x[i * 8] > 0 ? 1 : -1;
  const auto m = svm_train(x, y, {1e6, 50, 0.01}, rng).model;
  EXPECT_LE(norm(m.weights), 1e-2);
}

TEST(Svm, ObjectiveNonIncreasingAcrossEpochWindows) {
  Rng rng(10);
  const std::size_t N = 60, D = 16;
  Tensor x = fill_uniform({N, D}, -1, 1, rng);
  std::vector<int> y(N);
  for (std::size_t i = 0; i < N; ++i) y[i] = (x[i * D] + 0.3 * x[i * D + 1] > 0) ? 1 : -1;
  Rng train(11);
  const auto trace = svm_train(x, y, {1e-4, 200, 0.01}, train).epoch_objective;
  // an increase may last at most two consecutive epochs and never exceeds the
  // value from three epochs before
  int run = 0;
  for (std::size_t e = 1; e < trace.size(); ++e) {
    run = trace[e] > trace[e - 1] + 1e-6 ? run + 1 : 0;
    EXPECT_LE(run, 2) << e;
    if (e >= 3) {
      EXPECT_LE(trace[e], trace[e - 3] + 1e-6) << e;
    }
  }
}

TEST(Svm, PredictRules) {
  LinearSvmModel m{vec({1.f, -1.f}), 0.f, 1e-4, 0};
  EXPECT_EQ(svm_predict(m, std::vector<float>{1.f, 1.f}).label, 1);  // score 0
  EXPECT_EQ(svm_predict(m, std::vector<float>{0.5f, 1.f}).label, -1);
  EXPECT_EQ(svm_predict(m, std::vector<float>{1.f, 0.5f}).label,
            svm_predict(m, std::vector<float>{2.f, 1.f}).label);
  EXPECT_EQ(code_of([&] { svm_predict(m, std::vector<float>{1.f}); }), ErrorCode::shape_mismatch);
}

TEST(Svm, Errors) {
  Tensor x({2, 2}, {1, 0, 0, 1});
  Rng rng(1);
  EXPECT_EQ(code_of([&] { svm_train(x, std::vector<int>{1, 1}, {}, rng); }), ErrorCode::degenerate);
  EXPECT_EQ(code_of([&] { svm_train(x, std::vector<int>{1, 0}, {}, rng); }), ErrorCode::label);
}

TEST(Files, DescriptorAndSvmRoundTrip) {
  const fs::path dir = fs::temp_directory_path() / "stconv_features";
  fs::remove_all(dir);
  fs::create_directories(dir);
  Rng rng(12);
  std::vector<VideoDescriptor> ds;
  for (int i = 0; i < 3; ++i) {
    ds.push_back({"v" + std::to_string(i), aggregate_descriptor({fill_uniform({16}, -1, 1, rng)}), i % 2});
  }
  save_descriptors(dir / "d.stt", ds);
  EXPECT_TRUE(fs::exists(dir / "d.csv"));
  const auto back = load_descriptors(dir / "d.stt");
  ASSERT_EQ(back.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].video_id, ds[i].video_id);
    EXPECT_EQ(back[i].label, ds[i].label);
    EXPECT_EQ(back[i].vector, ds[i].vector);
  }
  const LinearSvmModel m{fill_uniform({16}, -1, 1, rng), 0.25f, 1e-4, 3};
  save_svm(dir / "svm.stm", m);
  const LinearSvmModel l = load_svm(dir / "svm.stm");
  EXPECT_EQ(l.weights, m.weights);
  EXPECT_EQ(l.bias, m.bias);
}

TEST(Finetune, ScheduleArithmetic) {
  EXPECT_EQ(clips_per_video(2560, 640), 4u);
  FinetuneConfig cfg;
  EXPECT_DOUBLE_EQ(nn::scheduled_learning_rate(cfg.sgd, 0), 1e-4);
  EXPECT_NEAR(nn::scheduled_learning_rate(cfg.sgd, 4), 1e-6, 1e-18);
  EXPECT_EQ(cfg.sgd.batch_size, 4u);
  EXPECT_EQ(cfg.epochs, 8u);
}

namespace {

FinetuneConfig tiny_config() {
  FinetuneConfig cfg;
  cfg.sgd = {0.01, 0.1, 2, 0.9, 4};
  cfg.epochs = 4;
  cfg.clips_per_video = 2;
  cfg.sampler.clip_len = 8;
  cfg.sampler.overlap = 4;
  cfg.sampler.resize_h = cfg.sampler.resize_w = 32;
  cfg.sampler.crop_h = cfg.sampler.crop_w = 32;
  cfg.sampler.flip_probability = 0.0;
  return cfg;
}

std::vector<video::VideoSource> tiny_videos(std::size_t per_class) {
  eval::SyntheticSpec s;
  s.videos_per_class = per_class;
  s.frames = 16;
  return eval::generate_synthetic(s);
}

}  // namespace

TEST(Finetune, LossDecreasesOnTinySet) {
  const auto videos = tiny_videos(8);
  Rng rng(13);
  net::Network net(net::build_tiny_r2p1d(2, 8, 32), rng);
  const auto r = finetune(net, videos, tiny_config(), rng);
  ASSERT_EQ(r.epoch_loss.size(), 4u);
  EXPECT_EQ(r.iteration_loss.size(), 4u * 16 * 2 / 4);
  EXPECT_LT(r.epoch_loss.back(), r.epoch_loss.front());
}

TEST(Finetune, ZeroLearningRateIsFixedPoint) {
  const auto videos = tiny_videos(2);
  Rng rng(14);
  net::Network net(net::build_tiny_r2p1d(2, 8, 32), rng);
  std::vector<Tensor> before;
  for (auto* p : net.parameters()) before.push_back(p->value);
  auto cfg = tiny_config();
  cfg.sgd.learning_rate = 0.0;
  cfg.epochs = 1;
  finetune(net, videos, cfg, rng);
  const auto after = net.parameters();
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(after[i]->value, before[i]);
}

TEST(Finetune, LabelOutOfRange) {
  auto videos = tiny_videos(1);
  videos[0].label = 5;
  Rng rng(15);
  net::Network net(net::build_tiny_r2p1d(2, 8, 32), rng);
  EXPECT_EQ(code_of([&] { finetune(net, videos, tiny_config(), rng); }), ErrorCode::label);
}

TEST(Finetune, PredictVideoIsOnSimplex) {
  const auto videos = tiny_videos(1);
  Rng rng(16);
  net::Network net(net::build_tiny_r2p1d(2, 8, 32), rng);
  const Tensor p = predict_video(net, videos[0], tiny_config().sampler, false, rng);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_NEAR(double(p[0]) + p[1], 1.0, 1e-6);
}
