#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "stconv/rng.hpp"
#include "stconv/tensor.hpp"
#include "stconv/video/frames.hpp"

namespace stconv::video {

struct Clip {
  std::string video_id;
  std::size_t start_frame = 0;
  Tensor data;  // [3, T, H, W]
};

struct SamplerConfig {
  std::size_t clip_len = 16;
  std::size_t overlap = 8;
  std::size_t resize_h = 128;
  std::size_t resize_w = 171;
  std::size_t crop_h = 112;
  std::size_t crop_w = 112;
  bool train_mode = false;
  double flip_probability = 0.5;
  std::array<float, 3> mean{0.f, 0.f, 0.f};  // subtracted per channel after cropping

  std::size_t stride() const { return clip_len - overlap; }
  /// Throws invalid-config on clip_len == 0, overlap >= clip_len, crop larger
  /// than the resize target, or a flip probability outside [0, 1].
  void validate() const;
};

/// Frame count after padding short videos up to one clip.
inline std::size_t padded_frames(std::size_t frames, std::size_t clip_len) {
  return frames < clip_len ? clip_len : frames;
}

/// floor((F_padded - L) / s) + 1 starts at 0, s, 2s, ...
std::size_t clip_count(std::size_t frames, std::size_t clip_len, std::size_t overlap);
std::vector<std::size_t> clip_starts(std::size_t frames, std::size_t clip_len,
                                     std::size_t overlap);

/// Cuts [3, L, H, W] clips at clip_starts(). Frames past the end repeat the
/// last frame; trailing frames that do not fill a stride are dropped.
std::vector<Clip> sample_clips(const VideoSource& video, const SamplerConfig& cfg);

/// One clip of clip_len frames starting at `start` (padding rule applies).
Clip cut_clip(const VideoSource& video, std::size_t start, std::size_t clip_len);

/// Uniform start in [0, F_padded - clip_len].
Clip temporal_jitter_sample(const VideoSource& video, std::size_t clip_len, Rng& rng);

struct CropWindow {
  std::size_t y = 0;
  std::size_t x = 0;
  std::size_t h = 0;
  std::size_t w = 0;
  bool flip = false;

  friend bool operator==(const CropWindow&, const CropWindow&) = default;
};

/// Eval mode: centered at floor((in - crop) / 2), no flip. Train mode:
/// uniform origin, then a flip with cfg.flip_probability. Geometry error if
/// the crop exceeds the frame.
CropWindow choose_crop(std::size_t height, std::size_t width, const SamplerConfig& cfg,
                       Rng& rng);
Clip apply_crop(const Clip& clip, const CropWindow& window);
Clip augment(const Clip& clip, const SamplerConfig& cfg, Rng& rng);

/// Subtracts cfg.mean per channel (no-op when all offsets are zero).
void subtract_mean(Clip& clip, const std::array<float, 3>& mean);

/// Randomly permutes the frames of a clip (destroys temporal order).
void shuffle_frames(Clip& clip, Rng& rng);

/// Stacks equally shaped clips into [N, 3, T, H, W].
Tensor stack_clips(const std::vector<Clip>& clips);

/// Resize to cfg.resize_{h,w} when the video differs.
VideoSource prepare_video(const VideoSource& video, const SamplerConfig& cfg);
/// All sliding-window clips of a prepared video, center-cropped.
std::vector<Clip> eval_clips(const VideoSource& prepared, const SamplerConfig& cfg);
/// One jittered, augmented training clip of a prepared video.
Clip train_clip(const VideoSource& prepared, const SamplerConfig& cfg, Rng& rng);

}  // namespace stconv::video
