#include "stconv/video/frames.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <vector>

#include "stconv/io.hpp"

namespace stconv::video {

namespace fs = std::filesystem;

void validate(const VideoSource& video) {
  require(video.frames.rank() == 4 && video.frames.dim(1) == 3, ErrorCode::invalid_shape,
          video.id + ": frames must be F x 3 x H x W, got " +
              shape_to_string(video.frames.shape()));
}

namespace {

// Next whitespace-separated header token, skipping '#' comments.
std::string header_token(std::istream& in, const std::string& where) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      if (!tok.empty()) break;
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  require(!tok.empty(), ErrorCode::format, where + ": truncated header");
  return tok;
}

std::size_t header_number(std::istream& in, const std::string& where) {
  const std::string tok = header_token(in, where);
  require(std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(c); }),
          ErrorCode::format, where + ": bad header field '" + tok + "'");
  return std::stoul(tok);
}

}  // namespace

Tensor read_pnm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::io, "cannot open " + path.string());
  const std::string where = path.string();
  const std::string magic = header_token(in, where);
  require(magic == "P6" || magic == "P5", ErrorCode::format,
          where + ": only binary P6 / P5 images are supported");
  const std::size_t w = header_number(in, where);
  const std::size_t h = header_number(in, where);
  const std::size_t maxval = header_number(in, where);
  require(w >= 1 && h >= 1, ErrorCode::format, where + ": empty image");
  require(maxval >= 1 && maxval <= 255, ErrorCode::format, where + ": only 8-bit images");
  const std::size_t channels = magic == "P6" ? 3 : 1;
  std::vector<unsigned char> raw(w * h * channels);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  require(in.gcount() == static_cast<std::streamsize>(raw.size()), ErrorCode::format,
          where + ": truncated pixel data");

  Tensor frame({3, h, w});
  const float scale = 1.0f / static_cast<float>(maxval);
  for (std::size_t c = 0; c < 3; ++c) {
    const std::size_t src_c = channels == 3 ? c : 0;
    for (std::size_t i = 0; i < h * w; ++i) {
      frame[c * h * w + i] = std::min(1.0f, raw[i * channels + src_c] * scale);
    }
  }
  return frame;
}

void write_ppm(const fs::path& path, const Tensor& frame) {
  require(frame.rank() == 3 && frame.dim(0) == 3, ErrorCode::invalid_shape,
          "write_ppm expects 3 x H x W");
  const std::size_t h = frame.dim(1), w = frame.dim(2);
  std::string bytes = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  const std::size_t header = bytes.size();
  bytes.resize(header + 3 * h * w);
  for (std::size_t i = 0; i < h * w; ++i)
    for (std::size_t c = 0; c < 3; ++c) {
      const float v = std::clamp(frame[c * h * w + i], 0.0f, 1.0f);
      bytes[header + 3 * i + c] = static_cast<char>(std::lround(v * 255.0f));
    }
  write_text_atomic(path, bytes);
}

namespace {

bool is_frame_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".ppm" || ext == ".pgm";
}

}  // namespace

VideoSource load_video(const std::string& id, const fs::path& path, int label) {
  VideoSource video;
  video.id = id;
  video.label = label;
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && is_frame_file(entry.path())) files.push_back(entry.path());
    }
    require(!files.empty(), ErrorCode::io, path.string() + ": no .ppm / .pgm frames");
    std::sort(files.begin(), files.end());
    const Tensor first = read_pnm(files[0]);
    const std::size_t per_frame = first.size();
    std::vector<float> values;
    values.reserve(per_frame * files.size());
    for (const auto& f : files) {
      const Tensor frame = f == files[0] ? first : read_pnm(f);
      require(frame.shape() == first.shape(), ErrorCode::invalid_shape,
              f.string() + ": frame size differs from " + files[0].string());
      values.insert(values.end(), frame.values().begin(), frame.values().end());
    }
    video.frames = Tensor({files.size(), 3, first.dim(1), first.dim(2)}, std::move(values));
  } else {
    require(fs::is_regular_file(path, ec), ErrorCode::io, "no such video: " + path.string());
    video.frames = load_tensor(path);
  }
  validate(video);
  return video;
}

Tensor resize_bilinear(const Tensor& frame, std::size_t out_h, std::size_t out_w) {
  require(frame.rank() == 3, ErrorCode::invalid_shape, "resize expects C x H x W");
  require(out_h >= 1 && out_w >= 1, ErrorCode::invalid_shape, "resize target must be >= 1");
  const std::size_t C = frame.dim(0), H = frame.dim(1), W = frame.dim(2);
  if (H == out_h && W == out_w) return frame;

  struct Tap {
    std::size_t lo, hi;
    float frac;
  };
  auto taps = [](std::size_t in, std::size_t out) {
    std::vector<Tap> t(out);
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    for (std::size_t i = 0; i < out; ++i) {
      double src = (static_cast<double>(i) + 0.5) * scale - 0.5;
      src = std::clamp(src, 0.0, static_cast<double>(in - 1));
      const auto lo = static_cast<std::size_t>(std::floor(src));
      const std::size_t hi = std::min(lo + 1, in - 1);
      t[i] = {lo, hi, static_cast<float>(src - static_cast<double>(lo))};
    }
    return t;
  };
  const auto ty = taps(H, out_h);
  const auto tx = taps(W, out_w);
  Tensor out({C, out_h, out_w});
  for (std::size_t c = 0; c < C; ++c) {
    const float* src = frame.data() + c * H * W;
    float* dst = out.data() + c * out_h * out_w;
    for (std::size_t y = 0; y < out_h; ++y) {
      const float* r0 = src + ty[y].lo * W;
      const float* r1 = src + ty[y].hi * W;
      const float fy = ty[y].frac;
      for (std::size_t x = 0; x < out_w; ++x) {
        const float fx = tx[x].frac;
        const float top = r0[tx[x].lo] + fx * (r0[tx[x].hi] - r0[tx[x].lo]);
        const float bot = r1[tx[x].lo] + fx * (r1[tx[x].hi] - r1[tx[x].lo]);
        float v = top + fy * (bot - top);
        // guard the convex combination against rounding past its endpoints
        const float lo = std::min({r0[tx[x].lo], r0[tx[x].hi], r1[tx[x].lo], r1[tx[x].hi]});
        const float hi = std::max({r0[tx[x].lo], r0[tx[x].hi], r1[tx[x].lo], r1[tx[x].hi]});
        dst[y * out_w + x] = std::clamp(v, lo, hi);
      }
    }
  }
  return out;
}

VideoSource resize_video(const VideoSource& video, std::size_t out_h, std::size_t out_w) {
  validate(video);
  if (video.height() == out_h && video.width() == out_w) return video;
  const std::size_t F = video.frame_count();
  const std::size_t in_frame = 3 * video.height() * video.width();
  std::vector<float> values;
  values.reserve(F * 3 * out_h * out_w);
  for (std::size_t f = 0; f < F; ++f) {
    const auto first = video.frames.values().begin() + static_cast<std::ptrdiff_t>(f * in_frame);
    Tensor frame({3, video.height(), video.width()}, std::vector<float>(first, first + in_frame));
    const Tensor r = resize_bilinear(frame, out_h, out_w);
    values.insert(values.end(), r.values().begin(), r.values().end());
  }
  VideoSource out = video;
  out.frames = Tensor({F, 3, out_h, out_w}, std::move(values));
  return out;
}

}  // namespace stconv::video
