#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace stconv::video {

/// One row of `video_id,path,label,frames`.
struct ManifestEntry {
  std::string video_id;
  std::string path;  // as written; relative paths resolve against the manifest
  int label = 0;
  std::size_t frames = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct Manifest {
  std::filesystem::path base;  // directory of the manifest file
  std::vector<ManifestEntry> entries;

  std::filesystem::path resolve(const ManifestEntry& e) const;
  std::size_t size() const { return entries.size(); }
};

Manifest read_manifest(const std::filesystem::path& path);
std::string format_manifest(const std::vector<ManifestEntry>& entries);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

}  // namespace stconv::video
