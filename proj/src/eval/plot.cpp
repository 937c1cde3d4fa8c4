#include "stconv/eval/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace stconv::eval {

std::string format_embedding_csv(const Tensor& embedding, const std::vector<std::string>& ids,
                                 const std::vector<int>& classes) {
  require(embedding.rank() == 2 && embedding.dim(1) == 2, ErrorCode::invalid_shape,
          "embedding must be N x 2");
  const std::size_t N = embedding.dim(0);
  require(ids.size() == N && classes.size() == N, ErrorCode::shape_mismatch,
          "one id and class per embedded point");
  std::ostringstream out;
  out << "video_id,x,y,class\n";
  char buf[96];
  for (std::size_t i = 0; i < N; ++i) {
    std::snprintf(buf, sizeof buf, ",%.6g,%.6g,%d\n", embedding[2 * i], embedding[2 * i + 1],
                  classes[i]);
    out << ids[i] << buf;
  }
  return out.str();
}

std::string render_scatter_svg(const Tensor& embedding, const std::vector<int>& classes,
                               const std::string& title) {
  require(embedding.rank() == 2 && embedding.dim(1) == 2, ErrorCode::invalid_shape,
          "embedding must be N x 2");
  const std::size_t N = embedding.dim(0);
  require(classes.size() == N, ErrorCode::shape_mismatch, "one class per embedded point");
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  constexpr double size = 480, margin = 30;
  float x0 = embedding[0], x1 = embedding[0], y0 = embedding[1], y1 = embedding[1];
  for (std::size_t i = 0; i < N; ++i) {
    x0 = std::min(x0, embedding[2 * i]);
    x1 = std::max(x1, embedding[2 * i]);
    y0 = std::min(y0, embedding[2 * i + 1]);
    y1 = std::max(y1, embedding[2 * i + 1]);
  }
  const double sx = x1 > x0 ? (size - 2 * margin) / (x1 - x0) : 0.0;
  const double sy = y1 > y0 ? (size - 2 * margin) / (y1 - y0) : 0.0;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
      << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << margin << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">";
  for (char c : title) {
    if (c == '<') out << "&lt;";
    else if (c == '&') out << "&amp;";
    else out << c;
  }
  out << "</text>\n";
  char buf[160];
  for (std::size_t i = 0; i < N; ++i) {
    const double px = sx > 0 ? margin + (embedding[2 * i] - x0) * sx : size / 2;
    const double py = sy > 0 ? size - margin - (embedding[2 * i + 1] - y0) * sy : size / 2;
    const int c = classes[i] < 0 ? 0 : classes[i] % 6;
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"4\" fill=\"%s\"/>\n", px,
                  py, palette[c]);
    out << buf;
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace stconv::eval
