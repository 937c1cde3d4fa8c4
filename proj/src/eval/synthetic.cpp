#include "stconv/eval/synthetic.hpp"

#include <algorithm>
#include <cstdio>

#include "stconv/io.hpp"
#include "stconv/rng.hpp"

namespace stconv::eval {

namespace fs = std::filesystem;

void SyntheticSpec::validate() const {
  require(videos_per_class >= 1, ErrorCode::invalid_config, "need at least one video per class");
  require(frames >= 1 && height >= 1 && width >= 1, ErrorCode::invalid_config,
          "frame count and size must be >= 1");
  require(square >= 1 && square <= height && square <= width, ErrorCode::invalid_config,
          "square must fit inside the frame");
  require(max_speed >= 1, ErrorCode::invalid_config, "max speed must be >= 1");
  require(noise >= 0.0, ErrorCode::invalid_config, "noise must be >= 0");
}

video::VideoSource synthetic_video(const SyntheticSpec& spec, std::size_t index) {
  spec.validate();
  Rng rng = Rng(spec.seed).derive(index);
  const int label = static_cast<int>(index % 2);
  const std::size_t H = spec.height, W = spec.width, F = spec.frames, S = spec.square;
  const std::size_t x0 = rng.uniform_index(W);
  const std::size_t y0 = rng.uniform_index(H - S + 1);
  const std::size_t speed = 1 + rng.uniform_index(spec.max_speed);
  float color[3];
  for (auto& c : color) c = 0.5f + 0.5f * rng.next_float();
  const float background = 0.3f * rng.next_float();

  video::VideoSource v;
  char id[32];
  std::snprintf(id, sizeof id, "vid%04zu", index);
  v.id = id;
  v.label = label;
  v.frames = Tensor({F, 3, H, W});
  for (std::size_t f = 0; f < F; ++f) {
    const std::size_t shift = (speed * f) % W;
    const std::size_t x = label == 0 ? (x0 + shift) % W : (x0 + W - shift) % W;
    for (std::size_t c = 0; c < 3; ++c) {
      float* plane = v.frames.data() + (f * 3 + c) * H * W;
      for (std::size_t r = 0; r < H; ++r)
        for (std::size_t q = 0; q < W; ++q) {
          const bool inside = r >= y0 && r < y0 + S && (q + W - x) % W < S;
          float value = inside ? color[c] : background;
          if (spec.noise > 0.0) value += static_cast<float>(spec.noise * rng.normal());
          plane[r * W + q] = std::clamp(value, 0.0f, 1.0f);
        }
    }
  }
  return v;
}

std::vector<video::VideoSource> generate_synthetic(const SyntheticSpec& spec) {
  std::vector<video::VideoSource> out;
  for (std::size_t i = 0; i < 2 * spec.videos_per_class; ++i) out.push_back(synthetic_video(spec, i));
  return out;
}

std::vector<video::ManifestEntry> write_synthetic(const SyntheticSpec& spec, const fs::path& out_dir,
                                                  FrameFormat format) {
  spec.validate();
  fs::create_directories(out_dir / "videos");
  std::vector<video::ManifestEntry> rows;
  for (std::size_t i = 0; i < 2 * spec.videos_per_class; ++i) {
    const video::VideoSource v = synthetic_video(spec, i);
    std::string rel = "videos/" + v.id;
    if (format == FrameFormat::stt) {
      rel += ".stt";
      save_tensor(out_dir / rel, v.frames);
    } else {
      fs::create_directories(out_dir / rel);
      const std::size_t plane = 3 * spec.height * spec.width;
      for (std::size_t f = 0; f < spec.frames; ++f) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%05zu.ppm", f);
        const auto first = v.frames.values().begin() + static_cast<std::ptrdiff_t>(f * plane);
        video::write_ppm(out_dir / rel / name,
                         Tensor({3, spec.height, spec.width},
                                std::vector<float>(first, first + static_cast<std::ptrdiff_t>(plane))));
      }
    }
    rows.push_back({v.id, rel, v.label, spec.frames});
  }
  video::write_manifest(out_dir / "manifest.csv", rows);
  return rows;
}

}  // namespace stconv::eval
