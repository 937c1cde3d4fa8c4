#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stconv/net/network.hpp"
#include "stconv/tensor.hpp"
#include "stconv/video/sampler.hpp"

namespace stconv::features {

struct VideoDescriptor {
  std::string video_id;
  Tensor vector;  // [D], unit norm
  int label = -1;
};

/// fc6 output (before its ReLU) for each clip. The network must contain a
/// top-level "fc6" layer and every clip must match its input contract.
std::vector<Tensor> extract_fc6(net::Network& net, const std::vector<video::Clip>& clips);

/// Mean of the vectors followed by L2 normalization. Summation runs over the
/// vectors in sorted order, so the result does not depend on list order.
Tensor aggregate_descriptor(const std::vector<Tensor>& clip_features);

/// Descriptors as STT1 [N, D] plus a sidecar CSV `video_id,label,row` next to
/// it (same stem, .csv extension).
void save_descriptors(const std::filesystem::path& path,
                      const std::vector<VideoDescriptor>& descriptors);
std::vector<VideoDescriptor> load_descriptors(const std::filesystem::path& path);
std::filesystem::path descriptor_sidecar(const std::filesystem::path& path);

/// Stacks descriptor vectors into [N, D].
Tensor descriptor_matrix(const std::vector<VideoDescriptor>& descriptors);

}  // namespace stconv::features
