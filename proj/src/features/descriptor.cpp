#include "stconv/features/descriptor.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "stconv/io.hpp"

namespace stconv::features {

namespace fs = std::filesystem;

std::vector<Tensor> extract_fc6(net::Network& net, const std::vector<video::Clip>& clips) {
  const auto& spec = net.spec();
  const bool has_fc6 = std::any_of(spec.layers.begin(), spec.layers.end(),
                                   [](const net::LayerSpec& l) { return l.name == "fc6"; });
  require(has_fc6, ErrorCode::invalid_config, spec.name + " has no fc6 layer");
  const Shape want = spec.input.sample_shape();
  std::vector<Tensor> out;
  out.reserve(clips.size());
  for (const auto& clip : clips) {
    require(clip.data.shape() == want, ErrorCode::shape_mismatch,
            clip.video_id + ": clip is " + shape_to_string(clip.data.shape()) + ", expected " +
                shape_to_string(want));
    Shape batched{1};
    batched.insert(batched.end(), want.begin(), want.end());
    const Tensor y = net.forward_to(clip.data.reshaped(batched), "fc6", nn::Mode::infer);
    out.push_back(y.reshaped({y.size()}));
  }
  return out;
}

namespace {

// Pointers to the vectors in lexicographic order of their values.
std::vector<const Tensor*> sorted_view(const std::vector<Tensor>& v) {
  std::vector<const Tensor*> order;
  order.reserve(v.size());
  for (const auto& t : v) order.push_back(&t);
  std::sort(order.begin(), order.end(), [](const Tensor* a, const Tensor* b) {
    return std::lexicographical_compare(a->values().begin(), a->values().end(),
                                        b->values().begin(), b->values().end());
  });
  return order;
}

}  // namespace

Tensor aggregate_descriptor(const std::vector<Tensor>& clip_features) {
  require(!clip_features.empty(), ErrorCode::empty_input, "no clip features to aggregate");
  const std::size_t D = clip_features[0].size();
  std::vector<double> sum(D, 0.0);
  for (const Tensor* t : sorted_view(clip_features)) {
    require(t->size() == D && t->rank() == 1, ErrorCode::shape_mismatch,
            "clip feature vectors differ in length");
    for (std::size_t i = 0; i < D; ++i) sum[i] += (*t)[i];
  }
  double norm = 0.0;
  for (double& s : sum) {
    s /= static_cast<double>(clip_features.size());
    norm += s * s;
  }
  norm = std::sqrt(norm);
  require(norm > 0.0 && std::isfinite(norm), ErrorCode::degenerate,
          "mean feature vector is zero; cannot normalize");
  Tensor out({D});
  for (std::size_t i = 0; i < D; ++i) out[i] = static_cast<float>(sum[i] / norm);
  return out;
}

fs::path descriptor_sidecar(const fs::path& path) {
  require(path.extension() != ".csv", ErrorCode::invalid_config,
          "descriptor file must not use the .csv extension");
  fs::path p = path;
  return p.replace_extension(".csv");
}

Tensor descriptor_matrix(const std::vector<VideoDescriptor>& descriptors) {
  require(!descriptors.empty(), ErrorCode::empty_input, "no descriptors");
  const std::size_t D = descriptors[0].vector.size();
  std::vector<float> values;
  values.reserve(descriptors.size() * D);
  for (const auto& d : descriptors) {
    require(d.vector.size() == D, ErrorCode::shape_mismatch, "descriptor lengths differ");
    values.insert(values.end(), d.vector.values().begin(), d.vector.values().end());
  }
  return Tensor({descriptors.size(), D}, std::move(values));
}

void save_descriptors(const fs::path& path, const std::vector<VideoDescriptor>& descriptors) {
  const Tensor m = descriptor_matrix(descriptors);
  std::ostringstream csv;
  csv << "video_id,label,row\n";
  for (std::size_t r = 0; r < descriptors.size(); ++r) {
    require(descriptors[r].video_id.find(',') == std::string::npos, ErrorCode::format,
            "video ids cannot contain commas");
    csv << descriptors[r].video_id << ',' << descriptors[r].label << ',' << r << '\n';
  }
  write_file_atomic(path, [&](std::ostream& out) { write_tensor(out, m); });
  write_text_atomic(descriptor_sidecar(path), csv.str());
}

std::vector<VideoDescriptor> load_descriptors(const fs::path& path) {
  const Tensor m = load_tensor(path);
  require(m.rank() == 2, ErrorCode::format, path.string() + ": descriptors must be N x D");
  const std::size_t N = m.dim(0), D = m.dim(1);
  std::ifstream in(descriptor_sidecar(path));
  require(in.good(), ErrorCode::io, "missing sidecar " + descriptor_sidecar(path).string());
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == "video_id,label,row", ErrorCode::format, "bad descriptor sidecar header");
  std::vector<VideoDescriptor> out(N);
  std::vector<bool> seen(N, false);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    require(c1 != std::string::npos && c2 != std::string::npos, ErrorCode::format,
            "bad sidecar row '" + line + "'");
    int label = 0;
    std::size_t row = 0;
    const auto r1 = std::from_chars(line.data() + c1 + 1, line.data() + c2, label);
    const auto r2 = std::from_chars(line.data() + c2 + 1, line.data() + line.size(), row);
    require(r1.ec == std::errc() && r2.ec == std::errc() && row < N && !seen[row],
            ErrorCode::format, "bad sidecar row '" + line + "'");
    seen[row] = true;
    out[row].video_id = line.substr(0, c1);
    out[row].label = label;
    const auto first = m.values().begin() + static_cast<std::ptrdiff_t>(row * D);
    out[row].vector = Tensor({D}, std::vector<float>(first, first + static_cast<std::ptrdiff_t>(D)));
  }
  require(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }), ErrorCode::format,
          "sidecar does not cover every descriptor row");
  return out;
}

}  // namespace stconv::features
