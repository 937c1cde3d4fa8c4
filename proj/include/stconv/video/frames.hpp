#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include "stconv/tensor.hpp"

namespace stconv::video {

/// A decoded video: frames stored as one [F, 3, H, W] tensor, values in [0, 1].
struct VideoSource {
  std::string id;
  Tensor frames;
  int label = -1;  // -1 when unlabeled

  std::size_t frame_count() const { return frames.dim(0); }
  std::size_t height() const { return frames.dim(2); }
  std::size_t width() const { return frames.dim(3); }
};

/// Checks rank 4, three channels, at least one frame.
void validate(const VideoSource& video);

/// 8-bit binary PPM (P6) or PGM (P5, replicated to three channels),
/// scaled to [0, 1]. Returns [3, H, W].
Tensor read_pnm(const std::filesystem::path& path);
/// Writes a [3, H, W] frame as P6, clamping to [0, 1] and rounding to 8 bits.
void write_ppm(const std::filesystem::path& path, const Tensor& frame);

/// Loads a directory of numbered .ppm / .pgm frames (sorted by file name) or
/// an STT1 file of shape [F, 3, H, W].
VideoSource load_video(const std::string& id, const std::filesystem::path& path, int label = -1);

/// Bilinear resize of a [3, H, W] frame with half-pixel centers and clamped
/// borders.
Tensor resize_bilinear(const Tensor& frame, std::size_t out_h, std::size_t out_w);
VideoSource resize_video(const VideoSource& video, std::size_t out_h, std::size_t out_w);

}  // namespace stconv::video
