#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stconv/video/frames.hpp"
#include "stconv/video/manifest.hpp"

namespace stconv::eval {

/// Moving-square direction data set. Label 0 moves left to right, label 1
/// right to left; positions wrap around, so the position of the square in
/// any single frame is uniform for both classes.
struct SyntheticSpec {
  std::size_t videos_per_class = 40;
  std::size_t frames = 32;
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t square = 8;
  std::size_t max_speed = 2;  // pixels per frame, drawn from [1, max_speed]
  double noise = 0.05;        // Gaussian pixel noise, then clamped to [0, 1]
  std::uint64_t seed = 42;

  void validate() const;
};

enum class Direction { left_to_right = 0, right_to_left = 1 };

/// Video `index` (labels alternate 0, 1, 0, ...). Depends only on the spec
/// and the index.
video::VideoSource synthetic_video(const SyntheticSpec& spec, std::size_t index);
std::vector<video::VideoSource> generate_synthetic(const SyntheticSpec& spec);

enum class FrameFormat { ppm, stt };

/// Writes every video (a directory of PPM frames or one STT1 file) under
/// `out_dir/videos` plus `out_dir/manifest.csv`. Returns the manifest rows.
std::vector<video::ManifestEntry> write_synthetic(const SyntheticSpec& spec,
                                                  const std::filesystem::path& out_dir,
                                                  FrameFormat format = FrameFormat::ppm);

}  // namespace stconv::eval
