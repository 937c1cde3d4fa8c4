#include "stconv/video/sampler.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>

namespace stconv::video {

void SamplerConfig::validate() const {
  require(clip_len >= 1, ErrorCode::invalid_config, "clip length must be >= 1");
  require(overlap < clip_len, ErrorCode::invalid_config,
          "overlap must be smaller than the clip length");
  require(crop_h >= 1 && crop_w >= 1 && resize_h >= 1 && resize_w >= 1,
          ErrorCode::invalid_config, "resize and crop extents must be >= 1");
  require(crop_h <= resize_h && crop_w <= resize_w, ErrorCode::invalid_config,
          "crop larger than the resized frame");
  require(flip_probability >= 0.0 && flip_probability <= 1.0, ErrorCode::invalid_config,
          "flip probability must be in [0, 1]");
}

std::size_t clip_count(std::size_t frames, std::size_t clip_len, std::size_t overlap) {
  require(clip_len >= 1 && overlap < clip_len, ErrorCode::invalid_config,
          "need clip_len >= 1 and overlap < clip_len");
  return (padded_frames(frames, clip_len) - clip_len) / (clip_len - overlap) + 1;
}

std::vector<std::size_t> clip_starts(std::size_t frames, std::size_t clip_len,
                                     std::size_t overlap) {
  const std::size_t n = clip_count(frames, clip_len, overlap);
  std::vector<std::size_t> starts(n);
  for (std::size_t i = 0; i < n; ++i) starts[i] = i * (clip_len - overlap);
  return starts;
}

Clip cut_clip(const VideoSource& video, std::size_t start, std::size_t clip_len) {
  validate(video);
  const std::size_t F = video.frame_count();
  require(clip_len >= 1 && start + clip_len <= padded_frames(F, clip_len), ErrorCode::invalid_range,
          video.id + ": clip exceeds the padded frame range");
  const std::size_t plane = video.height() * video.width();
  Clip clip{video.id, start, Tensor({3, clip_len, video.height(), video.width()})};
  for (std::size_t t = 0; t < clip_len; ++t) {
    const std::size_t f = std::min(start + t, F - 1);
    for (std::size_t c = 0; c < 3; ++c) {
      std::memcpy(clip.data.data() + (c * clip_len + t) * plane,
                  video.frames.data() + (f * 3 + c) * plane, plane * sizeof(float));
    }
  }
  return clip;
}

std::vector<Clip> sample_clips(const VideoSource& video, const SamplerConfig& cfg) {
  std::vector<Clip> clips;
  for (std::size_t s : clip_starts(video.frame_count(), cfg.clip_len, cfg.overlap)) {
    clips.push_back(cut_clip(video, s, cfg.clip_len));
  }
  return clips;
}

Clip temporal_jitter_sample(const VideoSource& video, std::size_t clip_len, Rng& rng) {
  require(clip_len >= 1, ErrorCode::invalid_config, "clip length must be >= 1");
  const std::size_t choices = padded_frames(video.frame_count(), clip_len) - clip_len + 1;
  return cut_clip(video, static_cast<std::size_t>(rng.uniform_index(choices)), clip_len);
}

CropWindow choose_crop(std::size_t height, std::size_t width, const SamplerConfig& cfg,
                       Rng& rng) {
  require(cfg.crop_h <= height && cfg.crop_w <= width, ErrorCode::geometry,
          "crop " + std::to_string(cfg.crop_h) + "x" + std::to_string(cfg.crop_w) +
              " exceeds frame " + std::to_string(height) + "x" + std::to_string(width));
  CropWindow win{0, 0, cfg.crop_h, cfg.crop_w, false};
  if (!cfg.train_mode) {
    win.y = (height - cfg.crop_h) / 2;
    win.x = (width - cfg.crop_w) / 2;
    return win;
  }
  win.y = static_cast<std::size_t>(rng.uniform_index(height - cfg.crop_h + 1));
  win.x = static_cast<std::size_t>(rng.uniform_index(width - cfg.crop_w + 1));
  win.flip = rng.bernoulli(cfg.flip_probability);
  return win;
}

Clip apply_crop(const Clip& clip, const CropWindow& win) {
  const Tensor& d = clip.data;
  require(d.rank() == 4 && d.dim(0) == 3, ErrorCode::invalid_shape, "clip must be 3 x T x H x W");
  const std::size_t T = d.dim(1), H = d.dim(2), W = d.dim(3);
  require(win.h >= 1 && win.w >= 1 && win.y + win.h <= H && win.x + win.w <= W,
          ErrorCode::geometry, "crop window outside the clip");
  Clip out{clip.video_id, clip.start_frame, Tensor({3, T, win.h, win.w})};
  float* dst = out.data.data();
  for (std::size_t ct = 0; ct < 3 * T; ++ct) {
    const float* plane = d.data() + ct * H * W;
    for (std::size_t y = 0; y < win.h; ++y) {
      const float* row = plane + (win.y + y) * W + win.x;
      if (win.flip) {
        for (std::size_t x = 0; x < win.w; ++x) *dst++ = row[win.w - 1 - x];
      } else {
        dst = std::copy(row, row + win.w, dst);
      }
    }
  }
  return out;
}

void subtract_mean(Clip& clip, const std::array<float, 3>& mean) {
  if (mean == std::array<float, 3>{0.f, 0.f, 0.f}) return;
  const std::size_t per_channel = clip.data.size() / 3;
  for (std::size_t c = 0; c < 3; ++c) {
    float* p = clip.data.data() + c * per_channel;
    for (std::size_t i = 0; i < per_channel; ++i) p[i] -= mean[c];
  }
}

Clip augment(const Clip& clip, const SamplerConfig& cfg, Rng& rng) {
  require(clip.data.rank() == 4, ErrorCode::invalid_shape, "clip must be 3 x T x H x W");
  Clip out = apply_crop(clip, choose_crop(clip.data.dim(2), clip.data.dim(3), cfg, rng));
  subtract_mean(out, cfg.mean);
  return out;
}

void shuffle_frames(Clip& clip, Rng& rng) {
  const std::size_t T = clip.data.dim(1);
  const std::size_t plane = clip.data.dim(2) * clip.data.dim(3);
  std::vector<std::size_t> order(T);
  std::iota(order.begin(), order.end(), 0);
  shuffle(order.begin(), order.end(), rng);
  const Tensor src = clip.data;
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t t = 0; t < T; ++t) {
      std::memcpy(clip.data.data() + (c * T + t) * plane, src.data() + (c * T + order[t]) * plane,
                  plane * sizeof(float));
    }
}

Tensor stack_clips(const std::vector<Clip>& clips) {
  require(!clips.empty(), ErrorCode::empty_input, "no clips to stack");
  const Shape& s = clips[0].data.shape();
  Shape shape{clips.size()};
  shape.insert(shape.end(), s.begin(), s.end());
  std::vector<float> values;
  values.reserve(shape_product(shape));
  for (const auto& c : clips) {
    require(c.data.shape() == s, ErrorCode::shape_mismatch, "clips differ in shape");
    values.insert(values.end(), c.data.values().begin(), c.data.values().end());
  }
  return Tensor(std::move(shape), std::move(values));
}

VideoSource prepare_video(const VideoSource& video, const SamplerConfig& cfg) {
  return resize_video(video, cfg.resize_h, cfg.resize_w);
}

std::vector<Clip> eval_clips(const VideoSource& prepared, const SamplerConfig& cfg) {
  SamplerConfig eval = cfg;
  eval.train_mode = false;
  Rng unused(0);
  std::vector<Clip> clips = sample_clips(prepared, eval);
  for (auto& c : clips) c = augment(c, eval, unused);
  return clips;
}

Clip train_clip(const VideoSource& prepared, const SamplerConfig& cfg, Rng& rng) {
  SamplerConfig train = cfg;
  train.train_mode = true;
  return augment(temporal_jitter_sample(prepared, cfg.clip_len, rng), train, rng);
}

}  // namespace stconv::video
