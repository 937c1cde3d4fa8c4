#include "stconv/video/manifest.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "stconv/error.hpp"
#include "stconv/io.hpp"

namespace stconv::video {

namespace fs = std::filesystem;

namespace {

constexpr const char* kHeader = "video_id,path,label,frames";

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out(1);
  for (char c : line) {
    if (c == ',') {
      out.emplace_back();
    } else {
      out.back().push_back(c);
    }
  }
  return out;
}

template <typename T>
T parse_number(const std::string& s, const std::string& what) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && ptr == s.data() + s.size(), ErrorCode::format,
          "manifest: bad " + what + " '" + s + "'");
  return v;
}

}  // namespace

fs::path Manifest::resolve(const ManifestEntry& e) const {
  const fs::path p(e.path);
  return p.is_absolute() ? p : base / p;
}

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot open manifest " + path.string());
  Manifest m;
  m.base = path.parent_path();
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::format, "manifest is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == kHeader, ErrorCode::format,
          "manifest header must be '" + std::string(kHeader) + "'");
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    require(f.size() == 4, ErrorCode::format,
            "manifest row " + std::to_string(row) + ": expected 4 fields");
    require(!f[0].empty() && !f[1].empty(), ErrorCode::format,
            "manifest row " + std::to_string(row) + ": empty id or path");
    m.entries.push_back({f[0], f[1], parse_number<int>(f[2], "label"),
                         parse_number<std::size_t>(f[3], "frame count")});
  }
  return m;
}

std::string format_manifest(const std::vector<ManifestEntry>& entries) {
  std::ostringstream out;
  out << kHeader << '\n';
  for (const auto& e : entries) {
    require(e.video_id.find(',') == std::string::npos && e.path.find(',') == std::string::npos,
            ErrorCode::format, "manifest fields cannot contain commas");
    out << e.video_id << ',' << e.path << ',' << e.label << ',' << e.frames << '\n';
  }
  return out.str();
}

void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries) {
  write_text_atomic(path, format_manifest(entries));
}

}  // namespace stconv::video
